//! Local and global primitivity of curve classes against the local class
//! group `Cl^sc(X,P) ≅ Z/m` of a non-Gorenstein point.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::rational::{denom_u64, fmt_q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassGroupError {
    #[error("index must be at least 2, got {0}")]
    BadIndex(u64),
    #[error("denominator {den} of D·C = {value} does not divide the index {m}")]
    DenominatorMismatch { value: String, den: u64, m: u64 },
    #[error("splitting degree needs D to generate the local class group; the hypothesis was not granted")]
    GeneratorNotGranted,
    #[error("local splitting degree {degree} does not divide the index {m}")]
    BadDegree { degree: u64, m: u64 },
    #[error("contradiction: an imprimitive point must be the only non-Gorenstein point, found {0} points")]
    ImprimitiveWithOthers(usize),
    #[error("contradiction: {0} imprimitive points")]
    SeveralImprimitive(usize),
}

/// A non-Gorenstein point of index `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonGorPoint {
    pub m: u64,
    pub tag: String,
    pub ell: Option<u64>,
}

/// Whether `D` is known to generate `Cl^sc(X,P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Taken as a hypothesis; reports say so.
    #[default]
    Assumed,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimitivityReport {
    pub d_dot_c: String,
    pub m: u64,
    /// Order of `D·C` in `Q/Z`.
    pub image_order: u64,
    /// Order of the kernel of `Cl^sc → Q/Z`.
    pub splitting_degree: u64,
    pub generator: Generator,
}

impl PrimitivityReport {
    pub fn primitive(&self) -> bool {
        self.splitting_degree == 1
    }
}

impl fmt::Display for PrimitivityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.primitive() {
            write!(f, "primitive (D·C = {}, index {})", self.d_dot_c, self.m)
        } else {
            write!(
                f,
                "imprimitive, splitting degree {} (D·C = {}, image order {}, index {})",
                self.splitting_degree, self.d_dot_c, self.image_order, self.m
            )
        }
    }
}

/// Splitting degree of a curve through a point of index `m`, from `D·C`.
pub fn local_primitivity(
    d_dot_c: &Q,
    m: u64,
    generator: Generator,
) -> Result<PrimitivityReport, ClassGroupError> {
    if m < 2 {
        return Err(ClassGroupError::BadIndex(m));
    }
    let den = denom_u64(d_dot_c).unwrap_or(0);
    if den == 0 || !m.is_multiple_of(den) {
        return Err(ClassGroupError::DenominatorMismatch {
            value: fmt_q(d_dot_c),
            den,
            m,
        });
    }
    if generator == Generator::Unknown {
        return Err(ClassGroupError::GeneratorNotGranted);
    }
    Ok(PrimitivityReport {
        d_dot_c: fmt_q(d_dot_c),
        m,
        image_order: den,
        splitting_degree: m / den,
        generator,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "degree")]
pub enum LocalStatus {
    Primitive,
    Imprimitive(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "rank")]
pub enum BaseSingularity {
    Smooth,
    /// Du Val `A_r`.
    DuValA(u64),
}

impl fmt::Display for BaseSingularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseSingularity::Smooth => f.write_str("smooth"),
            BaseSingularity::DuValA(r) => write!(f, "A{r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GlobalPrimitivity {
    pub splitting_degree: u64,
    pub base: BaseSingularity,
}

fn base_for(degree: u64) -> BaseSingularity {
    if degree <= 1 {
        BaseSingularity::Smooth
    } else {
        BaseSingularity::DuValA(degree - 1)
    }
}

/// Global splitting degree of `C` from its non-Gorenstein points.
///
/// An imprimitive point must be the only one; two primitive points give
/// `gcd(m₁, m₂)`; anything else is primitive.
pub fn global_imprimitivity(
    points: &[(u64, LocalStatus)],
) -> Result<GlobalPrimitivity, ClassGroupError> {
    for &(m, st) in points {
        if m < 2 {
            return Err(ClassGroupError::BadIndex(m));
        }
        if let LocalStatus::Imprimitive(k) = st {
            if k < 2 || m % k != 0 {
                return Err(ClassGroupError::BadDegree { degree: k, m });
            }
        }
    }
    let imprimitive: Vec<u64> = points
        .iter()
        .filter_map(|&(_, st)| match st {
            LocalStatus::Imprimitive(k) => Some(k),
            LocalStatus::Primitive => None,
        })
        .collect();
    let degree = match (imprimitive.as_slice(), points.len()) {
        ([k], 1) => *k,
        ([_], n) => return Err(ClassGroupError::ImprimitiveWithOthers(n)),
        ([], 2) => points[0].0.gcd(&points[1].0),
        ([], _) => 1,
        (many, _) => return Err(ClassGroupError::SeveralImprimitive(many.len())),
    };
    Ok(GlobalPrimitivity {
        splitting_degree: degree,
        base: base_for(degree),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TorsionConstraint {
    Free,
    /// Cyclic, embedding into one of the local groups `Z/mᵢ`.
    CyclicEmbedding {
        local_orders: Vec<u64>,
        /// Every order allowed by some single local group.
        possible_orders: BTreeSet<u64>,
        lcm: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClscSummary {
    pub rank: usize,
    pub torsion: TorsionConstraint,
}

fn divisors(m: u64) -> impl Iterator<Item = u64> {
    (1..=m).filter(move |d| m.is_multiple_of(*d))
}

/// Rank and torsion constraints of `Cl^sc(X)` for a germ with `n_components`
/// components and local groups `Z/mᵢ`.
pub fn clsc_rank(
    n_components: usize,
    local_orders: &[u64],
) -> Result<ClscSummary, ClassGroupError> {
    if let Some(&m) = local_orders.iter().find(|&&m| m < 2) {
        return Err(ClassGroupError::BadIndex(m));
    }
    let torsion = if local_orders.is_empty() {
        TorsionConstraint::Free
    } else {
        TorsionConstraint::CyclicEmbedding {
            local_orders: local_orders.to_vec(),
            possible_orders: local_orders.iter().flat_map(|&m| divisors(m)).collect(),
            lcm: local_orders.iter().fold(1, |acc, &m| acc.lcm(&m)),
        }
    };
    Ok(ClscSummary {
        rank: n_components,
        torsion,
    })
}
