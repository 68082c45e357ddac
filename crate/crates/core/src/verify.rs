//! End-to-end verification of the example corpus, the parametric families,
//! the impossibility sweeps and the flip table.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::analysis::{analyze, Analysis};
use crate::class_group::Generator;
use crate::corpus::{self, Corpus, GraphCase, Origin};
use crate::cyclic_quot::{self, CycQuot, TVerdict};
use crate::dual_graph::parse_graph;
use crate::ell_calc::{self, KadSubcase, StepVerdict};
use crate::germ_rules::{self, Rejection, TableVerdict};
use crate::rational::{fmt_q, q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub case: String,
    pub item: String,
    pub pass: bool,
    pub expected: String,
    pub computed: String,
    pub origin: Option<Origin>,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass {
            write!(f, "PASS {} :: {} = {}", self.case, self.item, self.computed)?;
        } else {
            write!(
                f,
                "FAIL {} :: {}\n  - expected: {}\n  + computed: {}",
                self.case, self.item, self.expected, self.computed
            )?;
        }
        if let Some(o) = self.origin {
            write!(f, " [{o}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub name: String,
    pub admissible: usize,
    pub contradictions: usize,
    /// Tuples whose first degree value is exactly 0.
    pub survivors: usize,
    pub failures: Vec<String>,
}

impl SweepSummary {
    pub fn pass(&self) -> bool {
        self.failures.is_empty() && self.contradictions == self.admissible && self.admissible > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub sweep_max: u64,
    pub checks: Vec<CheckLine>,
    pub sweeps: Vec<SweepSummary>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.sweeps.iter().all(SweepSummary::pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// 0 when everything passes, 1 on any mismatch.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, case: &str, item: &str) -> Option<&CheckLine> {
        self.checks
            .iter()
            .find(|c| c.case == case && c.item == item)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        for s in &self.sweeps {
            writeln!(
                f,
                "{} sweep {} (max {}): {} admissible, {} survivors of the first inequality, {} contradictions",
                if s.pass() { "PASS" } else { "FAIL" },
                s.name,
                self.sweep_max,
                s.admissible,
                s.survivors,
                s.contradictions
            )?;
            for msg in &s.failures {
                writeln!(f, "  - {msg}")?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count()
            + self.sweeps.iter().filter(|s| !s.pass()).count();
        write!(
            f,
            "summary: {} checks, {} sweeps, {} failed",
            self.checks.len(),
            self.sweeps.len(),
            failed
        )
    }
}

struct Lines<'a> {
    case: &'a str,
    out: &'a mut Vec<CheckLine>,
}

impl Lines<'_> {
    fn eq(
        &mut self,
        item: impl Into<String>,
        expected: impl ToString,
        computed: impl ToString,
        origin: Option<Origin>,
    ) {
        let (expected, computed) = (expected.to_string(), computed.to_string());
        self.out.push(CheckLine {
            case: self.case.to_string(),
            item: item.into(),
            pass: expected == computed,
            expected,
            computed,
            origin,
        });
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn check_graph_case(
    case: &GraphCase,
    corpus: &Corpus,
    out: &mut Vec<CheckLine>,
    notes: &mut Vec<String>,
) {
    let mut lines = Lines {
        case: &case.name,
        out,
    };
    let text = corpus
        .files
        .get(&case.graph)
        .map(String::as_str)
        .unwrap_or("");
    let g = match parse_graph(text) {
        Ok(g) => g,
        Err(e) => {
            lines.eq("parse", "ok", e, None);
            return;
        }
    };
    let a: Analysis = analyze(&g, case.index, Generator::Assumed);
    lines.eq("tree", case.tree, a.tree, Some(Origin::Published));
    lines.eq(
        "cluster count",
        case.cluster.len(),
        a.clusters.len(),
        Some(Origin::Derived),
    );
    for exp in &case.cluster {
        let key: BTreeSet<&String> = exp.vertices.iter().collect();
        let label = format!("cluster {{{}}}", exp.vertices.join(","));
        let Some(c) = a
            .clusters
            .iter()
            .find(|c| c.vertices.iter().collect::<BTreeSet<_>>() == key)
        else {
            lines.eq(format!("{label} present"), "yes", "no", Some(exp.origin));
            continue;
        };
        lines.eq(
            format!("{label} negative definite"),
            true,
            c.negative_definite,
            Some(Origin::Derived),
        );
        lines.eq(
            format!("{label} shape"),
            &exp.shape,
            c.shape,
            Some(exp.origin),
        );
        lines.eq(
            format!("{label} class"),
            &exp.class,
            opt(c.class),
            Some(exp.origin),
        );
        if let Some(qexp) = &exp.quot {
            lines.eq(
                format!("{label} quotient"),
                qexp,
                opt(c.quot.clone()),
                Some(exp.origin),
            );
        }
        if let Some(m) = exp.t_index {
            let got = c.t.as_ref().and_then(|t| t.as_ref()).map(|t| t.m);
            lines.eq(format!("{label} T index"), m, opt(got), Some(exp.origin));
        }
        if let Some(r) = exp.du_val {
            lines.eq(
                format!("{label} Du Val A_r"),
                r,
                opt(c.du_val),
                Some(exp.origin),
            );
        }
    }
    for (id, exp) in &case.delta {
        lines.eq(
            format!("delta {id}"),
            &exp.value,
            opt(a.coefficient(id)),
            Some(exp.origin),
        );
    }
    for (id, exp) in &case.kc {
        let got = a.component(id).and_then(|c| c.k_dot_c.clone());
        lines.eq(format!("K.C {id}"), &exp.value, opt(got), Some(exp.origin));
    }
    lines.eq(
        "germ feasible",
        case.germ_feasible,
        opt(a.germ_feasible),
        Some(Origin::Derived),
    );
    for (id, exp) in &case.splitting {
        let got = match a.component(id).and_then(|c| c.primitivity.clone()) {
            Some(Ok(p)) => p.splitting_degree.to_string(),
            Some(Err(e)) => e,
            None => "none (no index given)".to_string(),
        };
        lines.eq(
            format!("splitting degree {id}"),
            exp.value,
            got,
            Some(exp.origin),
        );
    }
    for flag in &a.flags {
        notes.push(format!("{}: {flag}", case.name));
    }
    if let Some(n) = &case.note {
        notes.push(format!("{}: {n}", case.name));
    }
}

fn check_k1a_a(m: u64, out: &mut Vec<CheckLine>) {
    let case = format!("family k1a_a m={m:02}");
    let mut lines = Lines { case: &case, out };
    let mut chain = vec![2; m as usize - 2];
    chain.push(m + 2);
    let expected = CycQuot {
        n: m * m,
        q: m * (m - 1) - 1,
    };
    let got = cyclic_quot::chain_to_quot(&chain);
    lines.eq(
        "quotient",
        expected,
        got.as_ref()
            .map_or_else(|e| e.to_string(), |s| s.to_string()),
        Some(Origin::Published),
    );
    let back = cyclic_quot::quot_to_chain(expected);
    lines.eq(
        "round trip",
        cyclic_quot::format_chain(&chain),
        cyclic_quot::format_chain(&back),
        Some(Origin::Trivial),
    );
    let t = cyclic_quot::classify_t(&chain).map(|v| match v {
        TVerdict::T(c) => format!("T index {}", c.m),
        TVerdict::NotT => "not T".into(),
    });
    lines.eq(
        "class T",
        format!("T index {m}"),
        t.unwrap_or_else(|e| e.to_string()),
        Some(Origin::Published),
    );
    let g = parse_graph(&corpus::k1a_a_graph(m, 2)).expect("generated graph is valid");
    let a = analyze(&g, None, Generator::Assumed);
    let right = fmt_q(&q(-1, m as i64));
    lines.eq(
        "K.C at chain end",
        &right,
        opt(a.component("c1").and_then(|c| c.k_dot_c.clone())),
        Some(Origin::Derived),
    );
    let left = fmt_q(&q(1 - m as i64, m as i64));
    lines.eq(
        "K.C at chain start",
        &left,
        opt(a.component("c0").and_then(|c| c.k_dot_c.clone())),
        Some(Origin::Derived),
    );
}

fn check_k1a_c(k: u64, out: &mut Vec<CheckLine>) {
    let case = format!("family k1a_c k={k}");
    let mut lines = Lines { case: &case, out };
    let m = 2 * k * (2 * k - 1);
    let expected = CycQuot {
        n: m * m,
        q: m * (2 * k + 1) - 1,
    };
    let g = parse_graph(&corpus::k1a_c_graph(k)).expect("generated graph is valid");
    let a = analyze(&g, Some(m), Generator::Assumed);
    let c = &a.clusters[0];
    lines.eq(
        "quotient",
        expected,
        opt(c.quot.clone()),
        Some(Origin::Published),
    );
    let t = c.t.as_ref().and_then(|t| t.as_ref()).map(|t| t.m);
    lines.eq("T index", m, opt(t), Some(Origin::Published));
    lines.eq(
        "delta e2",
        fmt_q(&q(2 * k as i64 - 1, 2 * k as i64)),
        opt(a.coefficient("e2")),
        Some(Origin::Published),
    );
    let c1 = a.component("c1");
    lines.eq(
        "K.C c1",
        fmt_q(&q(-1, 2 * k as i64)),
        opt(c1.and_then(|c| c.k_dot_c.clone())),
        Some(Origin::Published),
    );
    let split = |id: &str| match a.component(id).and_then(|c| c.primitivity.clone()) {
        Some(Ok(p)) => p.splitting_degree.to_string(),
        Some(Err(e)) => e,
        None => "none".into(),
    };
    lines.eq(
        "splitting degree c1",
        2 * k - 1,
        split("c1"),
        Some(Origin::Published),
    );
    lines.eq(
        "splitting degree c0",
        1,
        split("c0"),
        Some(Origin::Published),
    );
}

fn ic_sweep_summary(max: u64) -> SweepSummary {
    let traces = ell_calc::ic_sweep(max);
    let mut s = SweepSummary {
        name: "ic".into(),
        admissible: traces.len(),
        contradictions: 0,
        survivors: 0,
        failures: Vec::new(),
    };
    for t in &traces {
        let (m, mp, ap) = (t.m as i64, t.mprime as i64, t.aprime as i64);
        let tag = format!("({m}, {mp}, {ap})");
        let d2 = q(mp + 1 - 2 * ap, mp);
        match t.step("deg A + 2 deg B") {
            Some(step) if step.value == fmt_q(&d2) => {}
            other => s.failures.push(format!(
                "{tag}: d = 2 value {:?}, expected {}",
                other.map(|x| &x.value),
                fmt_q(&d2)
            )),
        }
        if d2 == q(0, 1) {
            s.survivors += 1;
            if !(2 * ap == mp + 1 && m > mp) {
                s.failures
                    .push(format!("{tag}: survivor without 2a' = m' + 1 and m > m'"));
            }
            let d3 = q(-(m + mp), 2 * m * mp);
            match t.step("deg A + 3 deg B") {
                Some(step) if step.value == fmt_q(&d3) => {}
                other => s.failures.push(format!(
                    "{tag}: d = 3 value {:?}, expected {}",
                    other.map(|x| &x.value),
                    fmt_q(&d3)
                )),
            }
        }
        if t.outcome() == StepVerdict::Contradiction {
            s.contradictions += 1;
        } else {
            s.failures.push(format!("{tag}: outcome {}", t.outcome()));
        }
    }
    s
}

fn kad_sweep_summary(max: u64, sub: KadSubcase) -> SweepSummary {
    let traces = ell_calc::kad_sweep(max, sub);
    let mut s = SweepSummary {
        name: format!("kad-{sub}"),
        admissible: traces.len(),
        contradictions: 0,
        survivors: 0,
        failures: Vec::new(),
    };
    let required: &[(&str, &str)] = match sub {
        KadSubcase::K3A => &[
            ("h1(A2 B2 omega)", "1"),
            ("h1(B2^2 omega)", "1"),
            ("h0(gr1)", "0"),
            ("h0(S2 gr1)", "0"),
        ],
        KadSubcase::KAD => &[("h1(omega E B2)", "1")],
    };
    for t in &traces {
        let tag = format!("({}, {}, {})", t.m, t.mprime, t.aprime);
        for (name, prefix) in required {
            let ok = t
                .step(name)
                .is_some_and(|st| st.value.split_whitespace().next() == Some(prefix));
            if !ok {
                s.failures
                    .push(format!("{tag}: step `{name}` does not give {prefix}"));
            }
        }
        if let Some(bad) = t
            .steps
            .iter()
            .find(|st| st.verdict == StepVerdict::Unexpected)
        {
            s.failures
                .push(format!("{tag}: step `{}` gave {}", bad.name, bad.value));
        }
        if t.outcome() == StepVerdict::Contradiction {
            s.contradictions += 1;
        } else {
            s.failures.push(format!("{tag}: outcome {}", t.outcome()));
        }
    }
    s
}

fn check_descriptors(corpus: &Corpus, out: &mut Vec<CheckLine>) {
    for d in &corpus.manifest.descriptor {
        let case = format!("descriptor {}", d.file);
        let mut lines = Lines { case: &case, out };
        let text = corpus.files.get(&d.file).map(String::as_str).unwrap_or("");
        let desc = match germ_rules::parse_descriptor(text) {
            Ok(x) => x,
            Err(e) => {
                lines.eq("parse", "ok", e, None);
                continue;
            }
        };
        let verdict = germ_rules::validate_against_table(&desc);
        let expected = match (&d.row, &d.rejection) {
            (Some(r), _) => format!("row {r}"),
            (None, Some(r)) => format!("rejected {r}"),
            (None, None) => "unspecified".into(),
        };
        let computed = match &verdict {
            TableVerdict::Accepted(a) => format!("row {}", a.row),
            TableVerdict::Rejected(Rejection::Forbidden { citation, .. }) => {
                format!("rejected {citation:?}")
            }
            TableVerdict::Rejected(Rejection::TooManyComponents { .. }) => {
                "rejected too_many_components".into()
            }
            TableVerdict::Rejected(r) => format!("rejected {r}"),
        };
        lines.eq("table verdict", expected, computed, Some(d.origin));
    }
}

fn check_table2(ms: &[u64], out: &mut Vec<CheckLine>) {
    for c in germ_rules::check_table2(&germ_rules::table2_rows(), ms) {
        let case = match c.m {
            Some(m) => format!("table2 {} m={m:02}", c.label),
            None => format!("table2 {}", c.label),
        };
        let computed = if c.pass {
            c.computed_k_plus.clone().unwrap_or_default()
        } else {
            format!("{} ({})", opt(c.computed_k_plus.clone()), c.detail)
        };
        out.push(CheckLine {
            case,
            item: format!("K+.C+ from K.C = {}", c.k_dot_c),
            pass: c.pass,
            expected: c.expected_k_plus.clone(),
            computed,
            origin: Some(Origin::Published),
        });
    }
}

/// Runs every check. Sweeps cover all admissible tuples with `m, m' ≤
/// sweep_max`; the parametric flip rows are instantiated at every odd
/// `m` from 5 to `sweep_max`.
pub fn verify_paper(corpus: &Corpus, sweep_max: u64) -> VerifyReport {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for case in &corpus.manifest.case {
        check_graph_case(case, corpus, &mut checks, &mut notes);
    }
    for m in 3..=30 {
        check_k1a_a(m, &mut checks);
    }
    for k in 2..=6 {
        check_k1a_c(k, &mut checks);
    }
    check_descriptors(corpus, &mut checks);
    let ms: Vec<u64> = (5..=sweep_max.max(5)).step_by(2).collect();
    check_table2(&ms, &mut checks);
    checks.sort_by(|a, b| (&a.case, &a.item).cmp(&(&b.case, &b.item)));

    let sweeps = vec![
        ic_sweep_summary(sweep_max),
        kad_sweep_summary(sweep_max, KadSubcase::K3A),
        kad_sweep_summary(sweep_max, KadSubcase::KAD),
    ];
    VerifyReport {
        sweep_max,
        checks,
        sweeps,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let r = verify_paper(&Corpus::builtin(), 9);
        let fails: Vec<String> = r.failures().map(|c| c.to_string()).collect();
        assert!(r.passed(), "{}\n{:?}", fails.join("\n"), r.sweeps);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn mutated_corpus_fails_with_diff() {
        let mut c = Corpus::builtin();
        c.case_mut("iidual")
            .unwrap()
            .delta
            .get_mut("v2")
            .unwrap()
            .value = "2/3".into();
        let r = verify_paper(&c, 9);
        assert_eq!(r.exit_code(), 1);
        let line = r.check("iidual", "delta v2").unwrap();
        assert!(!line.pass);
        assert_eq!(
            (line.expected.as_str(), line.computed.as_str()),
            ("2/3", "3/4")
        );
        assert!(line.to_string().contains("- expected: 2/3"));
    }
}
