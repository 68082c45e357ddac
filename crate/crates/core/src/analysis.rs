//! Full report on one configuration graph: clusters, codiscrepancies,
//! quotient types, `K·C` values and (optionally) primitivity.

use std::fmt;

use serde::Serialize;

use crate::class_group::{local_primitivity, Generator, PrimitivityReport};
use crate::cyclic_quot::{self, TVerdict};
use crate::dual_graph::{self, ClusterShape, ConfigGraph};
use crate::rational::{fmt_q, Q};
use crate::resolution::{self, KSign, SingularityClass};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coefficient {
    pub id: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TReport {
    pub base: String,
    pub derivation: String,
    pub d: u64,
    pub m: u64,
    pub a: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterReport {
    pub vertices: Vec<String>,
    pub shape: ClusterShape,
    pub leading_minors: Vec<String>,
    pub negative_definite: bool,
    pub coefficients: Vec<Coefficient>,
    pub class: Option<SingularityClass>,
    /// Chain weights along the path, for chain clusters.
    pub chain: Option<Vec<u64>>,
    pub quot: Option<String>,
    pub du_val: Option<usize>,
    /// `None` for non-chains; `Some(None)` when the chain is not of class T.
    pub t: Option<Option<TReport>>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub id: String,
    pub k_dot_c: Option<String>,
    pub sign: Option<KSign>,
    pub primitivity: Option<Result<PrimitivityReport, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub vertices: usize,
    pub edges: usize,
    pub tree: bool,
    pub clusters: Vec<ClusterReport>,
    pub components: Vec<ComponentReport>,
    /// `None` when some cluster does not contract.
    pub germ_feasible: Option<bool>,
    pub index: Option<u64>,
    pub flags: Vec<String>,
}

impl Analysis {
    pub fn cluster_of(&self, id: &str) -> Option<&ClusterReport> {
        self.clusters
            .iter()
            .find(|c| c.vertices.iter().any(|v| v == id))
    }

    pub fn component(&self, id: &str) -> Option<&ComponentReport> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn coefficient(&self, id: &str) -> Option<&str> {
        self.clusters
            .iter()
            .flat_map(|c| &c.coefficients)
            .find(|c| c.id == id)
            .map(|c| c.value.as_str())
    }
}

fn t_report(v: TVerdict) -> Option<TReport> {
    match v {
        TVerdict::NotT => None,
        TVerdict::T(c) => Some(TReport {
            base: c.base.to_string(),
            derivation: c.derivation_text(),
            d: c.d,
            m: c.m,
            a: c.a,
        }),
    }
}

/// Analyzes `g`. With `index = Some(m)`, each component's splitting degree
/// at a point of index `m` is reported, taking `K` as the generator of the
/// local class group when `generator` is [`Generator::Assumed`].
pub fn analyze(g: &ConfigGraph, index: Option<u64>, generator: Generator) -> Analysis {
    let mut clusters = Vec::new();
    let mut all_contract = true;
    for cl in dual_graph::exceptional_clusters(g) {
        let ids = g.ids(&cl.vertices);
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let m = dual_graph::intersection_matrix(g, &refs).expect("cluster ids come from the graph");
        let minors = m.leading_minors().iter().map(|x| x.to_string()).collect();
        let nd = dual_graph::is_negative_definite(&m);
        let mut report = ClusterReport {
            vertices: ids.clone(),
            shape: cl.shape,
            leading_minors: minors,
            negative_definite: nd,
            coefficients: Vec::new(),
            class: None,
            chain: None,
            quot: None,
            du_val: None,
            t: None,
            errors: Vec::new(),
        };
        match resolution::codiscrepancy(g, &refs) {
            Ok(d) => {
                report.class = Some(resolution::singularity_class(&d));
                report.coefficients = d
                    .ids
                    .iter()
                    .zip(&d.coefficients)
                    .map(|(id, v)| Coefficient {
                        id: id.clone(),
                        value: fmt_q(v),
                    })
                    .collect();
            }
            Err(e) => {
                all_contract = false;
                report.errors.push(e.to_string());
            }
        }
        if cl.shape == ClusterShape::Chain {
            let chain: Vec<u64> = cl
                .vertices
                .iter()
                .map(|&v| g.vertex(v).self_int.unsigned_abs())
                .collect();
            report.du_val = cyclic_quot::du_val_a(&chain);
            match cyclic_quot::chain_to_quot(&chain) {
                Ok(s) => report.quot = Some(s.to_string()),
                Err(e) => report.errors.push(e.to_string()),
            }
            match cyclic_quot::classify_t(&chain) {
                Ok(v) => report.t = Some(t_report(v)),
                Err(e) => report.errors.push(e.to_string()),
            }
            report.chain = Some(chain);
        }
        clusters.push(report);
    }

    let kreport = if all_contract {
        resolution::k_dot_components(g).ok()
    } else {
        None
    };
    let components = g
        .component_vertices()
        .into_iter()
        .map(|c| {
            let id = g.vertex(c).id.clone();
            let k = kreport.as_ref().and_then(|r| r.component(&id)).cloned();
            let primitivity = match (&k, index) {
                (Some(k), Some(m)) => Some(primitivity_of(&k.k_dot_c, m, generator)),
                _ => None,
            };
            ComponentReport {
                id,
                k_dot_c: k.as_ref().map(|k| fmt_q(&k.k_dot_c)),
                sign: k.map(|k| k.sign),
                primitivity,
            }
        })
        .collect();

    let mut flags = Vec::new();
    if clusters.len() > 1 {
        flags.push(format!(
            "{} exceptional clusters: the surface has {} singular points",
            clusters.len(),
            clusters.len()
        ));
        for c in clusters.iter().filter(|c| c.du_val.is_some()) {
            flags.push(format!(
                "cluster {{{}}} is a Du Val A{} point besides the main singularity",
                c.vertices.join(","),
                c.du_val.unwrap_or(0)
            ));
        }
    }
    for c in &clusters {
        if c.class == Some(SingularityClass::NotLogCanonical) {
            flags.push(format!(
                "cluster {{{}}} has a codiscrepancy coefficient above 1",
                c.vertices.join(",")
            ));
        }
    }

    Analysis {
        vertices: g.len(),
        edges: g.edge_count(),
        tree: dual_graph::is_tree(g),
        clusters,
        components,
        germ_feasible: kreport.map(|r| r.germ_feasible),
        index,
        flags,
    }
}

fn primitivity_of(k: &Q, m: u64, generator: Generator) -> Result<PrimitivityReport, String> {
    local_primitivity(k, m, generator).map_err(|e| e.to_string())
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "graph: {} vertices, {} edges, tree: {}",
            self.vertices, self.edges, self.tree
        )?;
        for (i, c) in self.clusters.iter().enumerate() {
            writeln!(
                f,
                "cluster {}: {{{}}} shape {}",
                i + 1,
                c.vertices.join(", "),
                c.shape
            )?;
            writeln!(
                f,
                "  leading minors: {} (negative definite: {})",
                c.leading_minors.join(", "),
                c.negative_definite
            )?;
            if !c.coefficients.is_empty() {
                let parts: Vec<String> = c
                    .coefficients
                    .iter()
                    .map(|x| format!("{}={}", x.id, x.value))
                    .collect();
                writeln!(f, "  codiscrepancy: {}", parts.join(", "))?;
            }
            if let Some(class) = c.class {
                writeln!(f, "  class: {class}")?;
            }
            if let Some(chain) = &c.chain {
                writeln!(f, "  chain: {}", cyclic_quot::format_chain(chain))?;
            }
            if let Some(q) = &c.quot {
                writeln!(f, "  quotient: {q}")?;
            }
            if let Some(r) = c.du_val {
                writeln!(f, "  Du Val: A{r}")?;
            }
            match &c.t {
                Some(Some(t)) => writeln!(
                    f,
                    "  class T: yes, index {} (d, m, a) = ({}, {}, {}); derivation {}",
                    t.m, t.d, t.m, t.a, t.derivation
                )?,
                Some(None) => writeln!(f, "  class T: no")?,
                None => {}
            }
            for e in &c.errors {
                writeln!(f, "  error: {e}")?;
            }
        }
        writeln!(f, "components:")?;
        for c in &self.components {
            match (&c.k_dot_c, c.sign) {
                (Some(k), Some(sign)) => {
                    let verdict = match sign {
                        KSign::Negative => "K-negative",
                        KSign::Zero => "K.C = 0, infeasible",
                        KSign::Positive => "K-positive, infeasible",
                    };
                    write!(f, "  {}: K.C = {k} ({verdict})", c.id)?;
                }
                _ => write!(f, "  {}: K.C unavailable", c.id)?,
            }
            match &c.primitivity {
                Some(Ok(p)) => write!(f, "; {p}")?,
                Some(Err(e)) => write!(f, "; primitivity: {e}")?,
                None => {}
            }
            writeln!(f)?;
        }
        match self.germ_feasible {
            Some(true) => writeln!(f, "germ: feasible (every component K-negative)")?,
            Some(false) => writeln!(f, "germ: infeasible")?,
            None => writeln!(f, "germ: undetermined (a cluster does not contract)")?,
        }
        if let Some(m) = self.index {
            writeln!(
                f,
                "index: {m} (K taken as generator of the local class group)"
            )?;
        }
        for flag in &self.flags {
            writeln!(f, "flag: {flag}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::dual_graph::parse_graph;

    #[test]
    fn iidual_report() {
        let g = parse_graph(Corpus::builtin_file("iidual.graph").unwrap()).unwrap();
        let a = analyze(&g, Some(4), Generator::Assumed);
        assert!(a.tree);
        assert_eq!(a.coefficient("v3"), Some("1"));
        assert_eq!(a.component("v9").unwrap().k_dot_c.as_deref(), Some("-1/2"));
        let p = a
            .component("v9")
            .unwrap()
            .primitivity
            .clone()
            .unwrap()
            .unwrap();
        assert_eq!(p.splitting_degree, 2);
        assert_eq!(a.germ_feasible, Some(true));
    }

    #[test]
    fn cd3_flags_extra_point() {
        let g = parse_graph(Corpus::builtin_file("cd3_a.graph").unwrap()).unwrap();
        let a = analyze(&g, None, Generator::Assumed);
        assert_eq!(a.clusters.len(), 2);
        assert!(a.flags.iter().any(|f| f.contains("Du Val A1")));
    }

    #[test]
    fn non_contractible_cluster_is_reported() {
        let g = parse_graph(
            "vertex a kind=exc self=-2\nvertex b kind=exc self=-2\nvertex c kind=exc self=-2\nvertex d kind=exc self=-2\nvertex e kind=exc self=-2\nvertex x kind=comp self=-1\nedge a b\nedge a c\nedge a d\nedge a e\nedge x b\n",
        )
        .unwrap();
        let a = analyze(&g, None, Generator::Assumed);
        assert!(!a.clusters[0].negative_definite);
        assert_eq!(a.germ_feasible, None);
        assert!(a.to_string().contains("does not contract"));
    }
}
