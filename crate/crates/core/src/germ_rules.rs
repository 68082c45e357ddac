//! Classification rules for extremal curve germs with reducible central
//! curve: the table of admissible configurations, the excluded component
//! pairs, component-count bounds, and flip arithmetic.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::class_group::NonGorPoint;
use crate::rational::{fmt_q, is_integer, parse_q, q, qi, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ComponentType {
    K1A,
    K2A,
    CD2,
    CAx2,
    CE2,
    CD3,
    IIA,
    IIdual,
    IEdual,
    IDdual,
    IC,
    IIB,
    KAD,
    K3A,
}

impl ComponentType {
    pub const ALL: [ComponentType; 14] = [
        ComponentType::K1A,
        ComponentType::K2A,
        ComponentType::CD2,
        ComponentType::CAx2,
        ComponentType::CE2,
        ComponentType::CD3,
        ComponentType::IIA,
        ComponentType::IIdual,
        ComponentType::IEdual,
        ComponentType::IDdual,
        ComponentType::IC,
        ComponentType::IIB,
        ComponentType::KAD,
        ComponentType::K3A,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentType::K1A => "k1A",
            ComponentType::K2A => "k2A",
            ComponentType::CD2 => "cD/2",
            ComponentType::CAx2 => "cAx/2",
            ComponentType::CE2 => "cE/2",
            ComponentType::CD3 => "cD/3",
            ComponentType::IIA => "IIA",
            ComponentType::IIdual => "IIdual",
            ComponentType::IEdual => "IEdual",
            ComponentType::IDdual => "IDdual",
            ComponentType::IC => "IC",
            ComponentType::IIB => "IIB",
            ComponentType::KAD => "kAD",
            ComponentType::K3A => "k3A",
        }
    }
}

impl fmt::Display for ComponentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComponentType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "cD2" => "cD/2",
            "cAx2" => "cAx/2",
            "cE2" => "cE/2",
            "cD3" => "cD/3",
            "II^vee" | "IIv" => "IIdual",
            other => other,
        };
        ComponentType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(alias))
            .ok_or_else(|| format!("unknown component type `{s}`"))
    }
}

/// A component of the central curve: either on a Gorenstein germ (no type
/// attached) or of one of the named types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Gorenstein,
    Typed(ComponentType),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Gorenstein => f.write_str("gorenstein"),
            Component::Typed(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GermKind {
    Flipping,
    Divisorial,
    ConicBundle,
}

impl GermKind {
    pub fn is_birational(self) -> bool {
        self != GermKind::ConicBundle
    }
}

impl fmt::Display for GermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GermKind::Flipping => "f",
            GermKind::Divisorial => "d",
            GermKind::ConicBundle => "cb",
        })
    }
}

impl FromStr for GermKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f" | "flipping" => Ok(GermKind::Flipping),
            "d" | "divisorial" => Ok(GermKind::Divisorial),
            "cb" | "conic-bundle" => Ok(GermKind::ConicBundle),
            other => Err(format!("unknown kind `{other}` (expected f, d or cb)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GermDescriptor {
    pub components: Vec<Component>,
    pub kind: GermKind,
    pub points: Vec<NonGorPoint>,
}

impl GermDescriptor {
    pub fn n(&self) -> usize {
        self.components.len()
    }

    fn count(&self, t: ComponentType) -> usize {
        self.components
            .iter()
            .filter(|&&c| c == Component::Typed(t))
            .count()
    }

    fn all_of(&self, allowed: &[ComponentType]) -> bool {
        self.components
            .iter()
            .all(|c| matches!(c, Component::Typed(t) if allowed.contains(t)))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescriptorError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown keyword `{keyword}`")]
    UnknownKeyword { line: usize, keyword: String },
    #[error("line {line}: {msg}")]
    BadValue { line: usize, msg: String },
    #[error("descriptor has no `kind` line")]
    MissingKind,
    #[error("descriptor has no components")]
    NoComponents,
    #[error("line {line}: `kind` given twice")]
    DuplicateKind { line: usize },
}

/// Parses the descriptor format:
///
/// ```text
/// component <type> [count=<n>]
/// kind f|d|cb
/// point index=<m> tag=<string> [ell=<r>]
/// ```
pub fn parse_descriptor(text: &str) -> Result<GermDescriptor, DescriptorError> {
    let mut components = Vec::new();
    let mut kind = None;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();
        let bad = |msg: String| DescriptorError::BadValue { line, msg };
        match keyword {
            "component" => {
                let (name, opts) = rest.split_first().ok_or(DescriptorError::Syntax {
                    line,
                    msg: "expected `component <type>`".into(),
                })?;
                let c = if name.eq_ignore_ascii_case("gorenstein") {
                    Component::Gorenstein
                } else {
                    Component::Typed(name.parse().map_err(bad)?)
                };
                let kv = key_values(line, opts)?;
                let count = match kv.get("count") {
                    Some(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| {
                        DescriptorError::BadValue {
                            line,
                            msg: format!("bad count `{v}`"),
                        }
                    })?,
                    None => 1,
                };
                if let Some(k) = kv.keys().find(|k| *k != "count") {
                    return Err(DescriptorError::UnknownKeyword {
                        line,
                        keyword: k.clone(),
                    });
                }
                components.extend(std::iter::repeat_n(c, count));
            }
            "kind" => {
                if kind.is_some() {
                    return Err(DescriptorError::DuplicateKind { line });
                }
                let [k] = rest.as_slice() else {
                    return Err(DescriptorError::Syntax {
                        line,
                        msg: "expected `kind f|d|cb`".into(),
                    });
                };
                kind = Some(k.parse().map_err(bad)?);
            }
            "point" => {
                let kv = key_values(line, &rest)?;
                if let Some(k) = kv
                    .keys()
                    .find(|k| !["index", "tag", "ell"].contains(&k.as_str()))
                {
                    return Err(DescriptorError::UnknownKeyword {
                        line,
                        keyword: k.clone(),
                    });
                }
                let m = kv
                    .get("index")
                    .ok_or_else(|| bad("point needs index=<m>".into()))?
                    .parse::<u64>()
                    .ok()
                    .filter(|&m| m >= 2)
                    .ok_or_else(|| bad("index must be an integer at least 2".into()))?;
                let tag = kv
                    .get("tag")
                    .ok_or_else(|| bad("point needs tag=<string>".into()))?
                    .clone();
                let ell = match kv.get("ell") {
                    Some(v) => Some(
                        v.parse::<u64>()
                            .map_err(|_| bad(format!("bad ell `{v}`")))?,
                    ),
                    None => None,
                };
                points.push(NonGorPoint { m, tag, ell });
            }
            other => {
                return Err(DescriptorError::UnknownKeyword {
                    line,
                    keyword: other.into(),
                });
            }
        }
    }
    let kind = kind.ok_or(DescriptorError::MissingKind)?;
    if components.is_empty() {
        return Err(DescriptorError::NoComponents);
    }
    Ok(GermDescriptor {
        components,
        kind,
        points,
    })
}

fn key_values(line: usize, words: &[&str]) -> Result<BTreeMap<String, String>, DescriptorError> {
    let mut out = BTreeMap::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| DescriptorError::Syntax {
            line,
            msg: format!("expected key=value, got `{w}`"),
        })?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

/// The forbidden combinations and the results that exclude them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Citation {
    /// A type IC component cannot meet a type k2A component.
    IcK2aExcluded,
    /// A type k2A component cannot meet a type kAD component.
    K2aKadExcluded,
    /// A type k2A component cannot meet a type k3A component.
    K2aK3aExcluded,
    /// A type II^∨ component cannot meet a type IIB component.
    IIdualIIBExcluded,
}

impl fmt::Display for Citation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Citation::IcK2aExcluded => "IC + k2A does not occur",
            Citation::K2aKadExcluded => "k2A + kAD does not occur",
            Citation::K2aK3aExcluded => "k2A + k3A does not occur",
            Citation::IIdualIIBExcluded => "IIdual + IIB does not occur",
        })
    }
}

pub fn forbidden_pair(a: ComponentType, b: ComponentType) -> Option<Citation> {
    use ComponentType::*;
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    match (x, y) {
        (K2A, IC) => Some(Citation::IcK2aExcluded),
        (K2A, KAD) => Some(Citation::K2aKadExcluded),
        (K2A, K3A) => Some(Citation::K2aK3aExcluded),
        (IIdual, IIB) => Some(Citation::IIdualIIBExcluded),
        _ => None,
    }
}

/// Upper bound on `N` for one contraction kind in one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum NBound {
    Exactly(usize),
    AtMost(usize),
    Unconstrained,
}

impl NBound {
    fn admits(self, n: usize) -> bool {
        match self {
            NBound::Exactly(b) => n == b,
            NBound::AtMost(b) => n <= b,
            NBound::Unconstrained => true,
        }
    }
}

impl fmt::Display for NBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NBound::Exactly(b) => write!(f, "N = {b}"),
            NBound::AtMost(b) => write!(f, "N <= {b}"),
            NBound::Unconstrained => f.write_str("N unconstrained"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Acceptance {
    pub row: u8,
    pub n: usize,
    pub bound: NBound,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Rejection {
    Forbidden {
        a: ComponentType,
        b: ComponentType,
        citation: Citation,
    },
    /// The table only covers reducible central curves.
    Irreducible,
    KindNotInRow {
        row: u8,
        kind: GermKind,
    },
    TooManyComponents {
        row: u8,
        kind: GermKind,
        n: usize,
        bound: NBound,
    },
    Points {
        row: u8,
        detail: String,
    },
    NoRow {
        detail: String,
    },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Forbidden { a, b, citation } => {
                write!(f, "forbidden pair ({a}, {b}): {citation}")
            }
            Rejection::Irreducible => {
                f.write_str("the table covers reducible central curves only (N >= 2)")
            }
            Rejection::KindNotInRow { row, kind } => {
                write!(f, "row {row} has no entry for kind {kind}")
            }
            Rejection::TooManyComponents {
                row,
                kind,
                n,
                bound,
            } => {
                write!(f, "row {row}, kind {kind}: N = {n} violates {bound}")
            }
            Rejection::Points { row, detail } => write!(f, "row {row}: {detail}"),
            Rejection::NoRow { detail } => write!(f, "no row matches: {detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum TableVerdict {
    Accepted(Acceptance),
    Rejected(Rejection),
}

impl fmt::Display for TableVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableVerdict::Accepted(a) => {
                write!(f, "accepted: row {} (N = {}, {})", a.row, a.n, a.bound)?;
                if let Some(note) = &a.note {
                    write!(f, "; {note}")?;
                }
                Ok(())
            }
            TableVerdict::Rejected(r) => write!(f, "rejected: {r}"),
        }
    }
}

/// Tags of non-Gorenstein points, matched on family and index arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
enum PointTag {
    /// `cA/m`, `cAx/4`, `cD/3`, …
    Family { family: String, index: u64 },
    /// `1/n(a,b,c)`, weights reduced mod `n`.
    Quotient { n: u64, weights: Vec<u64> },
}

fn parse_tag(tag: &str) -> Option<PointTag> {
    if let Some(rest) = tag.strip_prefix("1/") {
        let (n, w) = rest.split_once('(')?;
        let n: u64 = n.parse().ok()?;
        let w = w.strip_suffix(')')?;
        let weights = w
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<i64>()
                    .ok()
                    .map(|v| v.rem_euclid(n as i64) as u64)
            })
            .collect::<Option<Vec<_>>>()?;
        return (n >= 2 && weights.len() == 3).then_some(PointTag::Quotient { n, weights });
    }
    let (family, index) = tag.split_once('/')?;
    let index = index.parse().ok()?;
    ["cA", "cAx", "cD", "cE"]
        .contains(&family)
        .then(|| PointTag::Family {
            family: family.into(),
            index,
        })
}

fn same_weights(mut a: Vec<u64>, mut b: Vec<u64>) -> bool {
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

/// Which point shapes a row admits.
#[derive(Clone, Copy)]
enum PointRule {
    None,
    Family(&'static str, u64),
    /// `cA/m` with `m` the point's index.
    CaM,
    /// `1/m(2, m−2, 1)` with `m` odd and at least 5.
    IcPoint,
    /// `1/(2k−1)(1, −1, k)` plus `1/2(1,1,1)`.
    K3aPoints,
    /// `1/(2k−1)(1, −1, k)` plus one of `cA/2`, `cAx/2`, `cD/2`.
    KadPoints,
    Any,
}

fn check_tag_index(p: &NonGorPoint) -> Result<PointTag, String> {
    let tag = parse_tag(&p.tag).ok_or_else(|| format!("unrecognized point tag `{}`", p.tag))?;
    let idx = match &tag {
        PointTag::Family { index, .. } => *index,
        PointTag::Quotient { n, .. } => *n,
    };
    if idx != p.m {
        return Err(format!(
            "tag `{}` has index {idx} but the point has index {}",
            p.tag, p.m
        ));
    }
    Ok(tag)
}

fn is_k3a_point(t: &PointTag) -> bool {
    match t {
        PointTag::Quotient { n, weights } if n % 2 == 1 && *n >= 3 => {
            same_weights(weights.clone(), vec![1, n - 1, u64::div_ceil(*n, 2)])
        }
        _ => false,
    }
}

fn check_points(rule: PointRule, points: &[NonGorPoint]) -> Result<(), String> {
    let tags = points
        .iter()
        .map(check_tag_index)
        .collect::<Result<Vec<_>, _>>()?;
    let one = |what: &str| -> Result<&PointTag, String> {
        match tags.as_slice() {
            [t] => Ok(t),
            _ => Err(format!(
                "expected exactly one non-Gorenstein point ({what}), found {}",
                tags.len()
            )),
        }
    };
    match rule {
        PointRule::Any => Ok(()),
        PointRule::None if tags.is_empty() => Ok(()),
        PointRule::None => Err(format!(
            "expected no non-Gorenstein points, found {}",
            tags.len()
        )),
        PointRule::Family(fam, idx) => match one(&format!("{fam}/{idx}"))? {
            PointTag::Family { family, index } if family == fam && *index == idx => Ok(()),
            _ => Err(format!("point `{}` is not {fam}/{idx}", points[0].tag)),
        },
        PointRule::CaM => match one("cA/m")? {
            PointTag::Family { family, .. } if family == "cA" => Ok(()),
            _ => Err(format!("point `{}` is not of type cA/m", points[0].tag)),
        },
        PointRule::IcPoint => match one("1/m(2,m-2,1)")? {
            PointTag::Quotient { n, weights } => {
                if n % 2 == 0 || *n < 5 {
                    Err(format!("index {n} must be odd and at least 5"))
                } else if !same_weights(weights.clone(), vec![2, n - 2, 1]) {
                    Err(format!("point `{}` is not 1/m(2,m-2,1)", points[0].tag))
                } else {
                    Ok(())
                }
            }
            _ => Err(format!("point `{}` is not 1/m(2,m-2,1)", points[0].tag)),
        },
        PointRule::K3aPoints | PointRule::KadPoints => {
            if tags.len() != 2 {
                return Err(format!(
                    "expected exactly two non-Gorenstein points, found {}",
                    tags.len()
                ));
            }
            let other_ok = |t: &PointTag| match (rule, t) {
                (PointRule::K3aPoints, PointTag::Quotient { n: 2, weights }) => {
                    weights == &[1, 1, 1]
                }
                (PointRule::KadPoints, PointTag::Family { family, index: 2 }) => {
                    ["cA", "cAx", "cD"].contains(&family.as_str())
                }
                _ => false,
            };
            let ok = (is_k3a_point(&tags[0]) && other_ok(&tags[1]))
                || (is_k3a_point(&tags[1]) && other_ok(&tags[0]));
            if ok {
                Ok(())
            } else {
                let second = if matches!(rule, PointRule::K3aPoints) {
                    "1/2(1,1,1)"
                } else {
                    "cA/2, cAx/2 or cD/2"
                };
                Err(format!("expected 1/(2k-1)(1,-1,k) and {second}"))
            }
        }
    }
}

struct Row {
    number: u8,
    composition: fn(&GermDescriptor) -> bool,
    bounds: [Option<NBound>; 3],
    points: PointRule,
    note: Option<&'static str>,
}

fn kind_slot(k: GermKind) -> usize {
    match k {
        GermKind::Flipping => 0,
        GermKind::Divisorial => 1,
        GermKind::ConicBundle => 2,
    }
}

fn one_plus_rest(g: &GermDescriptor, lead: ComponentType, rest: &[ComponentType]) -> bool {
    let mut allowed = rest.to_vec();
    allowed.push(lead);
    g.count(lead) == 1 && g.all_of(&allowed)
}

const ROWS: &[Row] = {
    use ComponentType::*;
    use NBound::*;
    &[
        Row {
            number: 1,
            composition: |g| g.components.iter().all(|c| *c == Component::Gorenstein),
            bounds: [None, None, Some(Exactly(2))],
            points: PointRule::None,
            note: None,
        },
        Row {
            number: 2,
            composition: |g| g.all_of(&[CAx2]) || g.all_of(&[CD2]) || g.all_of(&[CE2]),
            bounds: [None, None, Some(Exactly(2))],
            points: PointRule::Any,
            note: None,
        },
        Row {
            number: 3,
            composition: |g| g.all_of(&[CD3]),
            bounds: [Some(Exactly(2)), Some(AtMost(4)), Some(AtMost(5))],
            points: PointRule::Family("cD", 3),
            note: None,
        },
        Row {
            number: 4,
            composition: |g| g.all_of(&[IIA]),
            bounds: [Some(AtMost(4)), Some(AtMost(7)), Some(AtMost(7))],
            points: PointRule::Family("cAx", 4),
            note: None,
        },
        Row {
            number: 5,
            composition: |g| g.all_of(&[IIdual]) && g.n() >= 2,
            bounds: [None, None, Some(Exactly(2))],
            points: PointRule::Family("cAx", 4),
            note: None,
        },
        Row {
            number: 6,
            composition: |g| one_plus_rest(g, IIdual, &[IIA]),
            bounds: [Some(Exactly(2)), Some(AtMost(4)), Some(AtMost(5))],
            points: PointRule::Family("cAx", 4),
            note: None,
        },
        Row {
            number: 7,
            composition: |g| one_plus_rest(g, IIB, &[IIA]),
            bounds: [None, Some(Exactly(2)), Some(AtMost(3))],
            points: PointRule::Family("cAx", 4),
            note: None,
        },
        Row {
            number: 8,
            composition: |g| one_plus_rest(g, IC, &[K1A]),
            bounds: [Some(Exactly(2)), Some(AtMost(4)), Some(AtMost(5))],
            points: PointRule::IcPoint,
            note: None,
        },
        Row {
            number: 9,
            composition: |g| g.all_of(&[K1A]),
            bounds: [
                Some(Unconstrained),
                Some(Unconstrained),
                Some(Unconstrained),
            ],
            points: PointRule::CaM,
            note: None,
        },
        Row {
            number: 10,
            composition: |g| one_plus_rest(g, K3A, &[K1A]),
            bounds: [None, Some(Exactly(2)), Some(AtMost(3))],
            points: PointRule::K3aPoints,
            note: Some("consistent with the table; existence open"),
        },
        Row {
            number: 11,
            composition: |g| one_plus_rest(g, KAD, &[K1A, CD2, CAx2]),
            bounds: [Some(Exactly(2)), Some(AtMost(4)), Some(AtMost(5))],
            points: PointRule::KadPoints,
            note: None,
        },
        Row {
            number: 12,
            composition: |g| g.count(K2A) >= 1 && g.all_of(&[K2A, K1A]),
            bounds: [
                Some(Unconstrained),
                Some(Unconstrained),
                Some(Unconstrained),
            ],
            points: PointRule::Any,
            note: Some("N and contraction kind unconstrained by the table"),
        },
    ]
};

fn row2_point(g: &GermDescriptor) -> PointRule {
    match g.components.first() {
        Some(Component::Typed(ComponentType::CAx2)) => PointRule::Family("cAx", 2),
        Some(Component::Typed(ComponentType::CD2)) => PointRule::Family("cD", 2),
        _ => PointRule::Family("cE", 2),
    }
}

/// Matches a descriptor against the table. Forbidden pairs are checked
/// first; otherwise the first row whose composition, kind, `N` and point
/// data all fit is returned, and failing that the first partial match's
/// reason.
pub fn validate_against_table(g: &GermDescriptor) -> TableVerdict {
    let typed: Vec<ComponentType> = g
        .components
        .iter()
        .filter_map(|c| match c {
            Component::Typed(t) => Some(*t),
            Component::Gorenstein => None,
        })
        .collect();
    for (i, &a) in typed.iter().enumerate() {
        for &b in &typed[i + 1..] {
            if let Some(citation) = forbidden_pair(a, b) {
                return TableVerdict::Rejected(Rejection::Forbidden { a, b, citation });
            }
        }
    }
    let n = g.n();
    if n < 2 {
        return TableVerdict::Rejected(Rejection::Irreducible);
    }
    let mut first_failure = None;
    for row in ROWS.iter().filter(|r| (r.composition)(g)) {
        let outcome = (|| {
            let bound = row.bounds[kind_slot(g.kind)].ok_or(Rejection::KindNotInRow {
                row: row.number,
                kind: g.kind,
            })?;
            if !bound.admits(n) {
                return Err(Rejection::TooManyComponents {
                    row: row.number,
                    kind: g.kind,
                    n,
                    bound,
                });
            }
            let rule = if row.number == 2 {
                row2_point(g)
            } else {
                row.points
            };
            check_points(rule, &g.points).map_err(|detail| Rejection::Points {
                row: row.number,
                detail,
            })?;
            Ok(Acceptance {
                row: row.number,
                n,
                bound,
                note: row.note.map(str::to_string),
            })
        })();
        match outcome {
            Ok(a) => return TableVerdict::Accepted(a),
            Err(r) => {
                first_failure.get_or_insert(r);
            }
        }
    }
    TableVerdict::Rejected(first_failure.unwrap_or_else(|| Rejection::NoRow {
        detail: format!(
            "component multiset [{}]",
            g.components.iter().map(Component::to_string).collect::<Vec<_>>().join(", ")
        ),
    }))
}

/// Which clause of the component-count lemma produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundClause {
    /// `N ≤ 5`, and `N ≤ 4` for a birational germ.
    General,
    /// The leading component is divisorial and not II^∨: `N ≤ 3`.
    DivisorialLeading,
    /// As above and the germ is divisorial too: `N = 2`.
    DivisorialBoth,
    /// The germ is flipping: `N = 2`.
    Flipping,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentBound {
    pub max_n: usize,
    pub clause: BoundClause,
    pub note: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error("component-count bound does not apply to a leading component of type {0}")]
    NotApplicable(ComponentType),
    #[error(
        "a single component germ is birational; kind cb is not possible for the leading component"
    )]
    LeadingConicBundle,
}

/// Bound on `N` when the leading component (meeting all others) has one of
/// the types cD/3, IC, kAD, II^∨, IIB, k3A.
pub fn component_bound(
    leading: ComponentType,
    leading_kind: GermKind,
    germ_kind: GermKind,
) -> Result<ComponentBound, BoundError> {
    use ComponentType::*;
    if ![CD3, IC, KAD, IIdual, IIB, K3A].contains(&leading) {
        return Err(BoundError::NotApplicable(leading));
    }
    if leading_kind == GermKind::ConicBundle {
        return Err(BoundError::LeadingConicBundle);
    }
    if germ_kind == GermKind::Flipping {
        let note = if leading == CD3 {
            "flipping germ; an index 3 flipping germ has at most 2 components as well"
        } else {
            "flipping germ: the flipped curve meets one index 2 curve germ"
        };
        return Ok(ComponentBound {
            max_n: 2,
            clause: BoundClause::Flipping,
            note: note.into(),
        });
    }
    let div_leading = leading_kind == GermKind::Divisorial && leading != IIdual;
    if div_leading && germ_kind == GermKind::Divisorial {
        return Ok(ComponentBound {
            max_n: 2,
            clause: BoundClause::DivisorialBoth,
            note: "contracting the leading component gives a Gorenstein divisorial germ".into(),
        });
    }
    if div_leading {
        return Ok(ComponentBound {
            max_n: 3,
            clause: BoundClause::DivisorialLeading,
            note: "contracting the leading component gives a Gorenstein germ".into(),
        });
    }
    let (max_n, note) = if germ_kind.is_birational() {
        (4, "birational germ")
    } else if leading == IIdual {
        (
            5,
            "IIdual leading component is exempt from the divisorial clauses",
        )
    } else {
        (5, "conic bundle germ")
    };
    Ok(ComponentBound {
        max_n,
        clause: BoundClause::General,
        note: note.into(),
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlipError {
    #[error("index(X) must be positive")]
    BadIndex,
    #[error("index of a point on X+ must be positive, got {0}")]
    BadPlusIndex(u64),
    #[error("K.C = {0} is not negative")]
    NotNegative(String),
    #[error("index(X) * K.C = {0} is not an integer")]
    NotIntegral(String),
    #[error("w = {0} is outside [0, 1)")]
    WOutOfRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlipGermData {
    pub index_x: u64,
    pub w_values: Option<Vec<String>>,
    pub plus_indices: Vec<u64>,
}

pub fn lcm_all(xs: &[u64]) -> u64 {
    xs.iter().fold(1, |acc, &x| acc.lcm(&x))
}

/// `K_{X⁺}·C⁺ = −index(X)·K_X·C / index(X⁺)`, with `index(X⁺)` the lcm of
/// the indices of the non-Gorenstein points of `X⁺` (1 when there are none).
pub fn flip_transfer(index_x: u64, k_dot_c: &Q, plus_indices: &[u64]) -> Result<Q, FlipError> {
    if index_x == 0 {
        return Err(FlipError::BadIndex);
    }
    if let Some(&p) = plus_indices.iter().find(|&&p| p == 0) {
        return Err(FlipError::BadPlusIndex(p));
    }
    if !k_dot_c.is_negative() {
        return Err(FlipError::NotNegative(fmt_q(k_dot_c)));
    }
    let scaled = k_dot_c * qi(index_x as i64);
    if !is_integer(&scaled) {
        return Err(FlipError::NotIntegral(fmt_q(&scaled)));
    }
    Ok(-scaled / qi(lcm_all(plus_indices) as i64))
}

/// `−K·C = 1 − Σ w`.
pub fn kc_from_w(w: &[Q]) -> Result<Q, FlipError> {
    if let Some(bad) = w.iter().find(|x| x.is_negative() || **x >= Q::one()) {
        return Err(FlipError::WOutOfRange(fmt_q(bad)));
    }
    Ok(w.iter().fold(Q::one(), |acc, x| acc - x))
}

/// How the index of `X` in a flip row depends on the parameter `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum IndexExpr {
    Const(u64),
    M,
    TwoM,
}

impl IndexExpr {
    pub fn eval(self, m: u64) -> u64 {
        match self {
            IndexExpr::Const(c) => c,
            IndexExpr::M => m,
            IndexExpr::TwoM => 2 * m,
        }
    }
}

/// One row of the table of flips of irreducible germs that are neither k1A
/// nor k2A. `K_X·C = kc_num / kc_den(m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlipRow {
    pub label: String,
    pub index_x: IndexExpr,
    pub kc_num: i64,
    pub kc_den: IndexExpr,
    pub k_plus: String,
    pub plus_indices: Vec<u64>,
}

pub fn table2_rows() -> Vec<FlipRow> {
    let row = |label: &str, index_x, kc_den, k_plus: &str, plus: &[u64]| FlipRow {
        label: label.into(),
        index_x,
        kc_num: -1,
        kc_den,
        k_plus: k_plus.into(),
        plus_indices: plus.to_vec(),
    };
    use IndexExpr::*;
    vec![
        row("cD/3 a", Const(3), Const(3), "1/2", &[2]),
        row("cD/3 b", Const(3), Const(3), "1", &[]),
        row("IIA a", Const(4), Const(4), "1/6", &[2, 3]),
        row("IIA b", Const(4), Const(4), "1/2", &[2]),
        row("IIA c", Const(4), Const(4), "1/2", &[2]),
        row("IC a", M, M, "1/2", &[2]),
        row("IC b", M, M, "1", &[]),
        row("kAD", TwoM, TwoM, "1/2", &[2]),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlipRowCheck {
    pub label: String,
    pub m: Option<u64>,
    pub k_dot_c: String,
    pub expected_k_plus: String,
    pub computed_k_plus: Option<String>,
    pub index_times_k: String,
    pub pass: bool,
    pub detail: String,
}

/// Checks every row for `index·|K·C| = 1` and `flip_transfer` reproducing
/// the stated `K⁺·C⁺`. Rows depending on `m` are checked at every odd
/// `m` in `ms` (the parameter of IC and kAD rows is odd and at least 5).
pub fn check_table2(rows: &[FlipRow], ms: &[u64]) -> Vec<FlipRowCheck> {
    let mut out = Vec::new();
    for row in rows {
        let parametric = !matches!(
            (row.index_x, row.kc_den),
            (IndexExpr::Const(_), IndexExpr::Const(_))
        );
        let instances: Vec<Option<u64>> = if parametric {
            ms.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for m in instances {
            let mv = m.unwrap_or(1);
            let index = row.index_x.eval(mv);
            let kc = q(row.kc_num, row.kc_den.eval(mv) as i64);
            let ik = qi(index as i64) * kc.abs();
            let expected = parse_q(&row.k_plus);
            let computed = flip_transfer(index, &kc, &row.plus_indices);
            let (pass, detail, computed_s) = match (&expected, &computed) {
                (None, _) => (false, format!("unparsable K+ value `{}`", row.k_plus), None),
                (_, Err(e)) => (false, e.to_string(), None),
                (Some(e), Ok(c)) => {
                    let unit = ik.is_one();
                    let ok = e == c && unit;
                    let detail = if ok {
                        "consistent".to_string()
                    } else if !unit {
                        format!("index * |K.C| = {} is not 1", fmt_q(&ik))
                    } else {
                        format!(
                            "expected K+.C+ = {}, flip transfer gives {}",
                            fmt_q(e),
                            fmt_q(c)
                        )
                    };
                    (ok, detail, Some(fmt_q(c)))
                }
            };
            out.push(FlipRowCheck {
                label: row.label.clone(),
                m,
                k_dot_c: fmt_q(&kc),
                expected_k_plus: row.k_plus.clone(),
                computed_k_plus: computed_s,
                index_times_k: fmt_q(&ik),
                pass,
                detail,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "n")]
pub enum PushStep {
    /// Contracting a divisorial germ through a point of index `n` drops
    /// `K·L` by at least `1/n`.
    Divisorial(u64),
    /// A flip drops `K·L` strictly.
    Flip,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PushBound {
    pub step: String,
    /// Upper bound on the pushed-forward `K·L` after this step.
    pub bound: String,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PushTrace {
    pub start: String,
    pub bounds: Vec<PushBound>,
    pub final_bound: String,
    /// Largest number of index-`n` divisorial steps compatible with the floor.
    pub max_divisorial_steps: Option<u64>,
}

/// Accumulates the upper bounds on `K·L` along a sequence of contractions
/// and flips, and the largest `l` with `start − l/n ≥ floor`.
pub fn push_inequalities(start: &Q, steps: &[PushStep], floor: &Q, n: u64) -> PushTrace {
    let mut cur = start.clone();
    let mut strict = false;
    let mut bounds = Vec::new();
    for s in steps {
        let name = match s {
            PushStep::Divisorial(k) => {
                cur -= q(1, (*k).max(1) as i64);
                format!("divisorial (index {k})")
            }
            PushStep::Flip => {
                strict = true;
                "flip".to_string()
            }
        };
        bounds.push(PushBound {
            step: name,
            bound: fmt_q(&cur),
            strict,
        });
    }
    let slack = start - floor;
    let max_divisorial_steps = (n > 0 && !slack.is_negative())
        .then(|| (slack * qi(n as i64)).floor().to_integer())
        .and_then(|v| u64::try_from(v).ok());
    PushTrace {
        start: fmt_q(start),
        bounds,
        final_bound: fmt_q(&cur),
        max_divisorial_steps,
    }
}

impl PushTrace {
    pub fn is_unchanged(&self) -> bool {
        self.bounds.is_empty() && self.final_bound == self.start
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(text: &str) -> GermDescriptor {
        parse_descriptor(text).unwrap()
    }

    fn accepted_row(text: &str) -> Option<u8> {
        match validate_against_table(&desc(text)) {
            TableVerdict::Accepted(a) => Some(a.row),
            TableVerdict::Rejected(_) => None,
        }
    }

    #[test]
    fn table_examples() {
        assert_eq!(
            accepted_row("component IIA count=7\nkind cb\npoint index=4 tag=cAx/4"),
            Some(4)
        );
        assert_eq!(
            accepted_row("component IC\ncomponent k1A\nkind f\npoint index=5 tag=1/5(2,3,1)"),
            Some(8)
        );
        let v = validate_against_table(&desc(
            "component IIA count=5\nkind f\npoint index=4 tag=cAx/4",
        ));
        assert!(matches!(
            v,
            TableVerdict::Rejected(Rejection::TooManyComponents {
                row: 4,
                bound: NBound::AtMost(4),
                n: 5,
                ..
            })
        ));
        assert_eq!(
            accepted_row("component IIA count=4\nkind f\npoint index=4 tag=cAx/4"),
            Some(4)
        );
    }

    #[test]
    fn ic_point_must_be_odd() {
        let v = validate_against_table(&desc(
            "component IC\ncomponent k1A\nkind f\npoint index=6 tag=1/6(2,4,1)",
        ));
        assert!(matches!(
            v,
            TableVerdict::Rejected(Rejection::Points { row: 8, .. })
        ));
    }

    #[test]
    fn forbidden_pairs() {
        use ComponentType::*;
        assert_eq!(forbidden_pair(IC, K2A), Some(Citation::IcK2aExcluded));
        assert_eq!(forbidden_pair(K2A, K3A), Some(Citation::K2aK3aExcluded));
        assert_eq!(forbidden_pair(K1A, K1A), None);
        for a in ComponentType::ALL {
            for b in ComponentType::ALL {
                assert_eq!(forbidden_pair(a, b), forbidden_pair(b, a));
            }
        }
        let v = validate_against_table(&desc(
            "component IIdual\ncomponent IIB\nkind cb\npoint index=4 tag=cAx/4",
        ));
        assert!(matches!(
            v,
            TableVerdict::Rejected(Rejection::Forbidden {
                citation: Citation::IIdualIIBExcluded,
                ..
            })
        ));
    }

    #[test]
    fn rows_10_and_12_notes() {
        let v = validate_against_table(&desc(
            "component k3A\ncomponent k1A\nkind d\npoint index=5 tag=1/5(1,-1,3)\npoint index=2 tag=1/2(1,1,1)",
        ));
        let TableVerdict::Accepted(a) = v else {
            panic!("{v}")
        };
        assert_eq!(a.row, 10);
        assert!(a.note.unwrap().contains("existence open"));
        let v = validate_against_table(&desc(
            "component k2A count=2\ncomponent k1A count=9\nkind f",
        ));
        let TableVerdict::Accepted(a) = v else {
            panic!("{v}")
        };
        assert_eq!((a.row, a.bound), (12, NBound::Unconstrained));
    }

    #[test]
    fn descriptor_errors() {
        assert_eq!(
            parse_descriptor("component IIA").unwrap_err(),
            DescriptorError::MissingKind
        );
        assert!(matches!(
            parse_descriptor("kind cb\nfoo bar"),
            Err(DescriptorError::UnknownKeyword { line: 2, .. })
        ));
        assert!(matches!(
            parse_descriptor("component XYZ\nkind cb"),
            Err(DescriptorError::BadValue { line: 1, .. })
        ));
    }

    #[test]
    fn bounds() {
        use ComponentType::*;
        use GermKind::*;
        let b = component_bound(IC, Flipping, Flipping).unwrap();
        assert_eq!((b.max_n, b.clause), (2, BoundClause::Flipping));
        let b = component_bound(K3A, Divisorial, Divisorial).unwrap();
        assert_eq!((b.max_n, b.clause), (2, BoundClause::DivisorialBoth));
        let b = component_bound(IIdual, Divisorial, ConicBundle).unwrap();
        assert_eq!((b.max_n, b.clause), (5, BoundClause::General));
        let b = component_bound(IC, Divisorial, ConicBundle).unwrap();
        assert_eq!(b.max_n, 3);
        assert_eq!(
            component_bound(K1A, Flipping, Flipping).unwrap_err(),
            BoundError::NotApplicable(K1A)
        );
    }

    #[test]
    fn flip_examples() {
        assert_eq!(flip_transfer(4, &q(-1, 4), &[2, 3]).unwrap(), q(1, 6));
        assert_eq!(flip_transfer(3, &q(-1, 3), &[2]).unwrap(), q(1, 2));
        assert_eq!(flip_transfer(5, &q(-1, 5), &[]).unwrap(), qi(1));
        assert!(matches!(
            flip_transfer(4, &q(1, 4), &[]),
            Err(FlipError::NotNegative(_))
        ));
        assert!(matches!(
            flip_transfer(4, &q(-1, 3), &[]),
            Err(FlipError::NotIntegral(_))
        ));
    }

    #[test]
    fn table2() {
        let checks = check_table2(&table2_rows(), &[5, 7]);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        let mut rows = table2_rows();
        rows[2].k_plus = "1/5".into();
        let checks = check_table2(&rows, &[5]);
        let bad: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].label, "IIA a");
    }

    #[test]
    fn w_examples() {
        assert_eq!(kc_from_w(&[]).unwrap(), qi(1));
        assert_eq!(kc_from_w(&[q(4, 5)]).unwrap(), q(1, 5));
        assert_eq!(kc_from_w(&[q(2, 3)]).unwrap(), q(1, 3));
        assert!(kc_from_w(&[qi(1)]).is_err());
    }

    #[test]
    fn push_examples() {
        let t = push_inequalities(&q(1, 2), &[], &qi(-1), 1);
        assert_eq!(t.max_divisorial_steps, Some(1));
        assert!(t.is_unchanged());
        let t = push_inequalities(
            &qi(1),
            &[PushStep::Divisorial(1), PushStep::Divisorial(1)],
            &qi(-1),
            1,
        );
        assert_eq!(t.max_divisorial_steps, Some(2));
        assert_eq!(t.final_bound, "-1");
    }
}
