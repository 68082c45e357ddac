//! Cyclic quotient surface singularities `1/n(1,q)` and their
//! Hirzebruch–Jung chains, with Du Val and class-T recognition.
//!
//! Chains read left to right: `n/q = a₁ − 1/(a₂ − 1/(… − 1/a_r))`.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycError {
    #[error("empty chain")]
    EmptyChain,
    #[error("chain entry {0} is below 2")]
    EntryTooSmall(u64),
    #[error("chain value overflows 64 bits")]
    Overflow,
    #[error("invalid quotient 1/{n}(1,{q}): need 0 < q < n and gcd(n, q) = 1")]
    InvalidQuotient { n: u64, q: u64 },
    #[error("not a class T singularity")]
    NotT,
    #[error("internal error: T witnesses disagree for {chain:?} (recursion {recursion}, arithmetic {arithmetic})")]
    WitnessDisagreement {
        chain: Vec<u64>,
        recursion: bool,
        arithmetic: bool,
    },
}

/// `1/n(1,q)` with `0 < q < n`, `gcd(n,q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CycQuot {
    pub n: u64,
    pub q: u64,
}

impl CycQuot {
    pub fn new(n: u64, q: u64) -> Result<Self, CycError> {
        if n < 2 || q == 0 || q >= n || n.gcd(&q) != 1 {
            return Err(CycError::InvalidQuotient { n, q });
        }
        Ok(CycQuot { n, q })
    }
}

impl fmt::Display for CycQuot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}(1,{})", self.n, self.q)
    }
}

pub fn format_chain(chain: &[u64]) -> String {
    let parts: Vec<String> = chain.iter().map(u64::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// Evaluates the continued fraction from the right.
pub fn chain_to_quot(chain: &[u64]) -> Result<CycQuot, CycError> {
    let (&last, rest) = chain.split_last().ok_or(CycError::EmptyChain)?;
    if let Some(&a) = chain.iter().find(|&&a| a < 2) {
        return Err(CycError::EntryTooSmall(a));
    }
    let (mut num, mut den) = (last, 1u64);
    for &a in rest.iter().rev() {
        let next = a
            .checked_mul(num)
            .and_then(|v| v.checked_sub(den))
            .ok_or(CycError::Overflow)?;
        den = num;
        num = next;
    }
    CycQuot::new(num, den)
}

/// Inverse expansion: `a = ⌈n/q⌉`, then `(n, q) ← (q, a·q − n)`.
pub fn quot_to_chain(s: CycQuot) -> Vec<u64> {
    let (mut n, mut q) = (s.n, s.q);
    let mut out = Vec::new();
    while q > 0 {
        let a = n.div_ceil(q);
        out.push(a);
        (n, q) = (q, a * q - n);
    }
    out
}

/// Length of an all-2 chain, i.e. the `r` of a Du Val `A_r` point.
pub fn du_val_a(chain: &[u64]) -> Option<usize> {
    (!chain.is_empty() && chain.iter().all(|&a| a == 2)).then_some(chain.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TBase {
    /// `[4]`.
    Four,
    /// `[3, 2, …, 2, 3]` with this many 2's.
    ThreeThree(usize),
}

impl fmt::Display for TBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TBase::Four => f.write_str("[4]"),
            TBase::ThreeThree(k) => {
                let mut c = vec![3];
                c.extend(std::iter::repeat_n(2, *k));
                c.push(3);
                f.write_str(&format_chain(&c))
            }
        }
    }
}

/// Certificate for a class T chain: a derivation from a base chain through
/// the two growth steps, plus the arithmetic form `n = d·m²`, `q = d·m·a − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TCertificate {
    pub quot: CycQuot,
    pub base: TBase,
    /// Chains from the base to the input, inclusive.
    pub derivation: Vec<Vec<u64>>,
    pub d: u64,
    pub m: u64,
    pub a: u64,
}

impl TCertificate {
    pub fn derivation_text(&self) -> String {
        self.derivation
            .iter()
            .map(|c| format_chain(c))
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum TVerdict {
    NotT,
    T(TCertificate),
}

impl TVerdict {
    pub fn is_t(&self) -> bool {
        matches!(self, TVerdict::T(_))
    }
}

fn base_of(chain: &[u64]) -> Option<TBase> {
    match chain {
        [4] => Some(TBase::Four),
        [3, mid @ .., 3] if mid.iter().all(|&a| a == 2) => Some(TBase::ThreeThree(mid.len())),
        _ => None,
    }
}

/// Undoes growth steps until a base chain is reached. The undo step is
/// forced: a chain starting with 2 can only come from `[2, b…, b_r + 1]`,
/// one ending with 2 only from `[b₁ + 1, …, 2]`.
fn recursion_witness(chain: &[u64]) -> Option<(TBase, Vec<Vec<u64>>)> {
    let mut cur = chain.to_vec();
    let mut path = vec![cur.clone()];
    loop {
        if let Some(base) = base_of(&cur) {
            path.reverse();
            return Some((base, path));
        }
        let r = cur.len();
        if r < 2 {
            return None;
        }
        if cur[0] == 2 && cur[r - 1] >= 3 {
            cur.remove(0);
            *cur.last_mut().unwrap() -= 1;
        } else if cur[r - 1] == 2 && cur[0] >= 3 {
            cur.pop();
            cur[0] -= 1;
        } else {
            return None;
        }
        path.push(cur.clone());
    }
}

/// Searches `n = d·m²`, `q = d·m·a − 1`, `0 < a < m`, `gcd(a, m) = 1`.
pub fn arithmetic_witness(s: CycQuot) -> Option<(u64, u64, u64)> {
    let mut m = 2u64;
    while m * m <= s.n {
        if s.n.is_multiple_of(m * m) {
            let d = s.n / (m * m);
            let dm = d * m;
            if (s.q + 1).is_multiple_of(dm) {
                let a = (s.q + 1) / dm;
                if a > 0 && a < m && a.gcd(&m) == 1 {
                    return Some((d, m, a));
                }
            }
        }
        m += 1;
    }
    None
}

/// Class T recognition by two independent witnesses that must agree.
pub fn classify_t(chain: &[u64]) -> Result<TVerdict, CycError> {
    let quot = chain_to_quot(chain)?;
    let rec = recursion_witness(chain);
    let arith = arithmetic_witness(quot);
    match (rec, arith) {
        (Some((base, derivation)), Some((d, m, a))) => Ok(TVerdict::T(TCertificate {
            quot,
            base,
            derivation,
            d,
            m,
            a,
        })),
        (None, None) => Ok(TVerdict::NotT),
        (r, a) => Err(CycError::WitnessDisagreement {
            chain: chain.to_vec(),
            recursion: r.is_some(),
            arithmetic: a.is_some(),
        }),
    }
}

pub fn classify_t_quot(s: CycQuot) -> Result<TVerdict, CycError> {
    classify_t(&quot_to_chain(s))
}

/// The `m` of `1/(d·m²)(1, d·m·a − 1)`.
pub fn t_index(v: &TVerdict) -> Result<u64, CycError> {
    match v {
        TVerdict::T(c) => Ok(c.m),
        TVerdict::NotT => Err(CycError::NotT),
    }
}

/// Inverse of `q` modulo `n` via the reversed chain.
pub fn dual_residue(s: CycQuot) -> CycQuot {
    let mut c = quot_to_chain(s);
    c.reverse();
    chain_to_quot(&c).expect("reversed chain is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_conversions() {
        assert_eq!(chain_to_quot(&[2]).unwrap(), CycQuot { n: 2, q: 1 });
        assert_eq!(chain_to_quot(&[2, 5]).unwrap(), CycQuot { n: 9, q: 5 });
        assert_eq!(
            chain_to_quot(&[3, 2, 5, 4, 2]).unwrap(),
            CycQuot { n: 144, q: 59 }
        );
        assert_eq!(quot_to_chain(CycQuot { n: 9, q: 4 }), vec![3, 2, 2, 2]);
        assert_eq!(chain_to_quot(&[1]).unwrap_err(), CycError::EntryTooSmall(1));
        assert_eq!(chain_to_quot(&[]).unwrap_err(), CycError::EmptyChain);
        assert!(CycQuot::new(4, 2).is_err());
    }

    #[test]
    fn t_examples() {
        let TVerdict::T(c) = classify_t(&[2, 5]).unwrap() else {
            panic!()
        };
        assert_eq!(c.base, TBase::Four);
        assert_eq!(c.derivation, vec![vec![4], vec![2, 5]]);
        assert_eq!((c.d, c.m, c.a), (1, 3, 2));
        let v = classify_t(&[3, 2, 5, 4, 2]).unwrap();
        assert_eq!(t_index(&v).unwrap(), 12);
        let TVerdict::T(c) = classify_t_quot(CycQuot { n: 4, q: 1 }).unwrap() else {
            panic!()
        };
        assert_eq!((c.d, c.m, c.a), (1, 2, 1));
        let v = classify_t_quot(CycQuot { n: 9, q: 4 }).unwrap();
        assert_eq!(v, TVerdict::NotT);
        assert_eq!(t_index(&v).unwrap_err(), CycError::NotT);
    }

    #[test]
    fn three_three_base() {
        let TVerdict::T(c) = classify_t(&[3, 2, 2, 3]).unwrap() else {
            panic!()
        };
        assert_eq!(c.base, TBase::ThreeThree(2));
        // 16/7 = 3 − 1/(2 − 1/(2 − 1/3)); 16 = 4·2², 7 = 4·2·1 − 1.
        assert_eq!(c.quot, CycQuot { n: 16, q: 7 });
        assert_eq!((c.d, c.m, c.a), (4, 2, 1));
    }

    #[test]
    fn du_val() {
        assert_eq!(du_val_a(&[2, 2, 2]), Some(3));
        assert_eq!(du_val_a(&[2, 3]), None);
        assert_eq!(chain_to_quot(&[2, 2, 2]).unwrap(), CycQuot { n: 4, q: 3 });
    }

    #[test]
    fn reversed_chain_inverts_residue() {
        let s = CycQuot { n: 144, q: 59 };
        let t = dual_residue(s);
        assert_eq!((s.q * t.q) % s.n, 1);
    }
}
