//! Fraction-free elimination over the integers.
//!
//! Pivoting is deterministic: the pivot in column `k` is the first row at or
//! below `k`, in input order, with a nonzero entry.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::rational::Q;

/// Determinant by Bareiss elimination.
pub fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut prev = BigInt::one();
    let mut sign_flip = false;
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign_flip {
        -d
    } else {
        d
    }
}

/// Leading principal minors `det(M[..k, ..k])` for `k = 1..=n`.
pub fn leading_minors(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    (1..=m.len())
        .map(|k| {
            let sub: Vec<Vec<BigInt>> = m[..k].iter().map(|row| row[..k].to_vec()).collect();
            det(&sub)
        })
        .collect()
}

/// Solves `M x = b` exactly. Returns `None` when `M` is singular.
pub fn solve(m: &[Vec<BigInt>], b: &[BigInt]) -> Option<Vec<Q>> {
    let n = m.len();
    assert_eq!(b.len(), n, "right-hand side length");
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(p, k);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    // Back substitution on the upper-triangular system.
    let mut x = vec![Q::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Q::from_integer(a[i][n].clone());
        for j in i + 1..n {
            acc -= Q::from_integer(a[i][j].clone()) * &x[j];
        }
        x[i] = acc / Q::from_integer(a[i][i].clone());
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    #[test]
    fn determinant_small() {
        assert_eq!(det(&mat(&[&[2, 1], &[1, 2]])), BigInt::from(3));
        assert_eq!(det(&mat(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(det(&mat(&[&[1, 2], &[2, 4]])), BigInt::zero());
    }

    #[test]
    fn solve_needs_row_swap() {
        let x = solve(
            &mat(&[&[0, 1], &[1, 0]]),
            &[BigInt::from(3), BigInt::from(5)],
        )
        .unwrap();
        assert_eq!(x, vec![q(5, 1), q(3, 1)]);
    }

    #[test]
    fn singular_is_none() {
        assert!(solve(&mat(&[&[1, 2], &[2, 4]]), &[BigInt::one(), BigInt::one()]).is_none());
    }
}
