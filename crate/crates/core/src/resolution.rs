//! Codiscrepancy of exceptional clusters and intersection numbers with `K`.
//!
//! For a cluster with intersection matrix `M` and `a_j = −E_j²`, the
//! codiscrepancy `Δ = Σ d_j E_j` solves `M d = (2 − a_j)_j`. A component
//! curve `C` (a (−1)-curve on the resolution) then has
//! `K·C = −1 + Σ d_E` over the exceptional curves it meets.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dual_graph::{self, ConfigGraph, GraphError, VertexKind};
use crate::linalg;
use crate::rational::{qi, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolutionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex `{0}` is not exceptional")]
    NotExceptional(String),
    #[error("cluster {0:?} is not negative definite, so it does not contract")]
    NotContractible(Vec<String>),
    #[error("empty cluster")]
    EmptyCluster,
}

/// Coefficients of `Δ` on one cluster, in the cluster's vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codiscrepancy {
    pub ids: Vec<String>,
    pub coefficients: Vec<Q>,
}

impl Codiscrepancy {
    pub fn get(&self, id: &str) -> Option<&Q> {
        self.ids
            .iter()
            .position(|x| x == id)
            .map(|i| &self.coefficients[i])
    }

    pub fn max(&self) -> Q {
        self.coefficients
            .iter()
            .cloned()
            .max()
            .unwrap_or_else(Q::zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityClass {
    LogTerminal,
    LogCanonicalStrict,
    NotLogCanonical,
}

impl fmt::Display for SingularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SingularityClass::LogTerminal => "log_terminal",
            SingularityClass::LogCanonicalStrict => "log_canonical_strict",
            SingularityClass::NotLogCanonical => "not_log_canonical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KSign {
    /// `K·C < 0`.
    Negative,
    /// `K·C = 0`; infeasible for an extremal germ.
    Zero,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentK {
    pub id: String,
    pub k_dot_c: Q,
    /// Sum of `d_E` over adjacent exceptional curves.
    pub adjacent_sum: Q,
    pub sign: KSign,
}

impl ComponentK {
    pub fn k_negative(&self) -> bool {
        self.sign == KSign::Negative
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KReport {
    pub clusters: Vec<Codiscrepancy>,
    pub components: Vec<ComponentK>,
    pub germ_feasible: bool,
}

impl KReport {
    pub fn component(&self, id: &str) -> Option<&ComponentK> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn delta(&self, id: &str) -> Option<&Q> {
        self.clusters.iter().find_map(|c| c.get(id))
    }
}

/// Solves for `Δ` on the cluster given by `ids` (in that order).
pub fn codiscrepancy(g: &ConfigGraph, ids: &[&str]) -> Result<Codiscrepancy, ResolutionError> {
    if ids.is_empty() {
        return Err(ResolutionError::EmptyCluster);
    }
    for id in ids {
        let i = g
            .index_of(id)
            .ok_or_else(|| GraphError::UnknownId(id.to_string()))?;
        if g.vertex(i).kind != VertexKind::Exceptional {
            return Err(ResolutionError::NotExceptional(id.to_string()));
        }
    }
    let m = dual_graph::intersection_matrix(g, ids)?;
    if !dual_graph::is_negative_definite(&m) {
        return Err(ResolutionError::NotContractible(m.ids));
    }
    // 2 − a_j with a_j = −E_j².
    let rhs: Vec<BigInt> = m
        .entries
        .iter()
        .enumerate()
        .map(|(j, r)| BigInt::from(2 + r[j]))
        .collect();
    let coefficients =
        linalg::solve(&m.to_bigint(), &rhs).expect("negative definite matrices are invertible");
    Ok(Codiscrepancy {
        ids: m.ids,
        coefficients,
    })
}

/// `K·C` for every component vertex, solving every exceptional cluster.
pub fn k_dot_components(g: &ConfigGraph) -> Result<KReport, ResolutionError> {
    let mut clusters = Vec::new();
    let mut d: BTreeMap<usize, Q> = BTreeMap::new();
    for cl in dual_graph::exceptional_clusters(g) {
        let ids = g.ids(&cl.vertices);
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let cd = codiscrepancy(g, &refs)?;
        for (v, c) in cl.vertices.iter().zip(&cd.coefficients) {
            d.insert(*v, c.clone());
        }
        clusters.push(cd);
    }
    let components: Vec<ComponentK> = g
        .component_vertices()
        .into_iter()
        .map(|c| {
            let adjacent_sum: Q = g.neighbors(c).filter_map(|w| d.get(&w)).cloned().sum();
            let k_dot_c = &adjacent_sum - qi(1);
            let sign = if adjacent_sum < Q::one() {
                KSign::Negative
            } else if adjacent_sum == Q::one() {
                KSign::Zero
            } else {
                KSign::Positive
            };
            ComponentK {
                id: g.vertex(c).id.clone(),
                k_dot_c,
                adjacent_sum,
                sign,
            }
        })
        .collect();
    let germ_feasible = components.iter().all(ComponentK::k_negative);
    Ok(KReport {
        clusters,
        components,
        germ_feasible,
    })
}

pub fn singularity_class(d: &Codiscrepancy) -> SingularityClass {
    let max = d.max();
    if max < Q::one() {
        SingularityClass::LogTerminal
    } else if max == Q::one() {
        SingularityClass::LogCanonicalStrict
    } else {
        SingularityClass::NotLogCanonical
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_graph::parse_graph;
    use crate::rational::q;

    #[test]
    fn single_minus_four() {
        let g = parse_graph("vertex a kind=exc self=-4").unwrap();
        let d = codiscrepancy(&g, &["a"]).unwrap();
        assert_eq!(d.coefficients, vec![q(1, 2)]);
        assert_eq!(singularity_class(&d), SingularityClass::LogTerminal);
    }

    #[test]
    fn chain_values() {
        let g = parse_graph(
            "vertex a kind=exc self=-3\nvertex b kind=exc self=-2\nvertex c kind=exc self=-5\nvertex d kind=exc self=-4\nvertex e kind=exc self=-2\nedge a b\nedge b c\nedge c d\nedge d e\n",
        )
        .unwrap();
        let d = codiscrepancy(&g, &["a", "b", "c", "d", "e"]).unwrap();
        assert_eq!(
            d.coefficients,
            vec![q(7, 12), q(3, 4), q(11, 12), q(5, 6), q(5, 12)]
        );
    }

    #[test]
    fn du_val_has_zero_codiscrepancy() {
        let g = parse_graph("vertex a kind=exc self=-2\nvertex b kind=exc self=-2\nedge a b\n")
            .unwrap();
        let d = codiscrepancy(&g, &["a", "b"]).unwrap();
        assert!(d.coefficients.iter().all(Zero::is_zero));
    }

    #[test]
    fn zero_k_is_infeasible() {
        // A (−1)-curve meeting two separate [4] curves: 1/2 + 1/2 = 1.
        let g = parse_graph(
            "vertex a kind=exc self=-4\nvertex b kind=exc self=-4\nvertex c kind=comp self=-1\nedge a c\nedge b c\n",
        )
        .unwrap();
        let r = k_dot_components(&g).unwrap();
        assert_eq!(r.components[0].k_dot_c, q(0, 1));
        assert_eq!(r.components[0].sign, KSign::Zero);
        assert!(!r.germ_feasible);
    }

    #[test]
    fn errors() {
        let g = parse_graph("vertex a kind=exc self=-2\nvertex c kind=comp self=-1\nedge a c\n")
            .unwrap();
        assert_eq!(
            codiscrepancy(&g, &["c"]).unwrap_err(),
            ResolutionError::NotExceptional("c".into())
        );
        let tri = parse_graph(
            "vertex a kind=exc self=-2\nvertex b kind=exc self=-2\nvertex c kind=exc self=-2\nedge a b\nedge b c\nedge c a\n",
        )
        .unwrap();
        assert!(matches!(
            codiscrepancy(&tri, &["a", "b", "c"]),
            Err(ResolutionError::NotContractible(_))
        ));
    }
}
