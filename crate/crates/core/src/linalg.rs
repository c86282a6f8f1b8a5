//! Small dense linear algebra over any [`Scalar`] field.
//!
//! Everything here works on row-major `Vec<Vec<S>>`; sizes are at most
//! 20×20 in practice. Pivots are chosen by largest magnitude, which is
//! harmless in exact mode and necessary in float mode.

use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

fn pivot_row<S: Scalar>(a: &[Vec<S>], col: usize, from: usize, tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (r, row) in a.iter().enumerate().skip(from) {
        if row[col].is_negligible(tol) {
            continue;
        }
        let mag = row[col].magnitude();
        if best.is_none_or(|(_, b)| mag > b) {
            best = Some((r, mag));
        }
    }
    best.map(|(r, _)| r)
}

/// Determinant of a square matrix (empty matrix has determinant 1).
pub fn det<S: Scalar>(a: &[Vec<S>]) -> S {
    let n = a.len();
    let mut a: Vec<Vec<S>> = a.to_vec();
    let mut d = S::one();
    for col in 0..n {
        let Some(p) = pivot_row(&a, col, col, 0.0) else {
            return S::zero();
        };
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        let pv = a[col][col].clone();
        d = d * pv.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / pv.clone();
            for c in col..n {
                let t = a[col][c].clone() * f.clone();
                a[r][c] = a[r][c].clone() - t;
            }
        }
    }
    d
}

/// Row echelon reduction in place; returns the pivot columns.
fn echelon<S: Scalar>(a: &mut [Vec<S>], tol: f64) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = pivot_row(a, c, r, tol) else {
            continue;
        };
        a.swap(p, r);
        let pv = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() / pv.clone();
        }
        for rr in 0..rows {
            if rr == r || a[rr][c].is_zero() {
                continue;
            }
            let f = a[rr][c].clone();
            for cc in 0..cols {
                let t = a[r][cc].clone() * f.clone();
                a[rr][cc] = a[rr][cc].clone() - t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<S: Scalar>(a: &[Vec<S>], tol: f64) -> usize {
    let mut a = a.to_vec();
    echelon(&mut a, tol).len()
}

/// Basis of the right kernel `{x : A x = 0}`.
pub fn kernel<S: Scalar>(a: &[Vec<S>], tol: f64) -> Vec<Vec<S>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = a.to_vec();
    let pivots = echelon(&mut r, tol);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(); cols];
            v[f] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn inverse<S: Scalar>(a: &[Vec<S>], tol: f64) -> Result<Vec<Vec<S>>> {
    let n = a.len();
    let mut aug: Vec<Vec<S>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            r
        })
        .collect();
    let pivots = echelon(&mut aug, tol);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return Err(Error::Singular(format!("{n}x{n} matrix is not invertible")));
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Vec<Vec<S>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(S::zero(), |acc, k| acc + row[k].clone() * b[k][j].clone())
                })
                .collect()
        })
        .collect()
}

pub fn transpose<S: Scalar>(a: &[Vec<S>]) -> Vec<Vec<S>> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn is_symmetric<S: Scalar>(a: &[Vec<S>], tol: f64) -> bool {
    let n = a.len();
    (0..n).all(|i| {
        a[i].len() == n && (0..i).all(|j| (a[i][j].clone() - a[j][i].clone()).is_negligible(tol))
    })
}

/// Inertia `(positive, negative, zero)` of a symmetric matrix by symmetric
/// Gaussian (congruence) reduction. Exact in exact mode.
///
/// When every remaining diagonal entry vanishes but some off-diagonal
/// `q_ij` does not, row/column `j` is added to row/column `i`, producing
/// the nonzero pivot `2 q_ij`.
pub fn inertia<S: RealScalar>(q: &[Vec<S>], tol: f64) -> Result<(usize, usize, usize)> {
    if !is_symmetric(q, tol) {
        return Err(Error::NotSymmetric);
    }
    let n = q.len();
    let mut a = q.to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    let (mut pos, mut neg) = (0, 0);
    while !active.is_empty() {
        let diag = active
            .iter()
            .copied()
            .filter(|&i| !a[i][i].is_negligible(tol))
            .max_by(|&x, &y| a[x][x].magnitude().total_cmp(&a[y][y].magnitude()));
        let piv = match diag {
            Some(i) => i,
            None => {
                let pair = active.iter().copied().find_map(|i| {
                    active
                        .iter()
                        .copied()
                        .find(|&j| j != i && !a[i][j].is_negligible(tol))
                        .map(|j| (i, j))
                });
                let Some((i, j)) = pair else { break };
                for k in 0..n {
                    let t = a[j][k].clone();
                    a[i][k] = a[i][k].clone() + t;
                }
                for k in 0..n {
                    let t = a[k][j].clone();
                    a[k][i] = a[k][i].clone() + t;
                }
                i
            }
        };
        let p = a[piv][piv].clone();
        if p > S::zero() {
            pos += 1;
        } else {
            neg += 1;
        }
        active.retain(|&k| k != piv);
        for &r in &active {
            let f = a[r][piv].clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for &c in &active {
                let t = a[piv][c].clone() * f.clone();
                a[r][c] = a[r][c].clone() - t;
            }
        }
    }
    Ok((pos, neg, n - pos - neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn qm(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| Rational::from_i64(x)).collect())
            .collect()
    }

    #[test]
    fn det_and_inverse() {
        let a = qm(&[&[2, 1], &[1, 1]]);
        assert_eq!(det(&a), Rational::from_i64(1));
        let inv = inverse(&a, 0.0).unwrap();
        assert_eq!(inv, qm(&[&[1, -1], &[-1, 2]]));
        assert!(inverse(&qm(&[&[1, 2], &[2, 4]]), 0.0).is_err());
    }

    #[test]
    fn kernel_of_rank_one() {
        let a = qm(&[&[1, 2, 3]]);
        let k = kernel(&a, 0.0);
        assert_eq!(k.len(), 2);
        for v in k {
            let s = v
                .iter()
                .zip(&a[0])
                .fold(Rational::from_i64(0), |acc, (x, y)| acc + x * y);
            assert_eq!(s, Rational::from_i64(0));
        }
    }

    #[test]
    fn inertia_examples() {
        let hyperbolic = qm(&[
            &[0, 0, 0, 1, 0, 0],
            &[0, 0, 0, 0, 1, 0],
            &[0, 0, 0, 0, 0, 1],
            &[1, 0, 0, 0, 0, 0],
            &[0, 1, 0, 0, 0, 0],
            &[0, 0, 1, 0, 0, 0],
        ]);
        assert_eq!(inertia(&hyperbolic, 0.0).unwrap(), (3, 3, 0));
        let zero = vec![vec![Rational::from_i64(0); 6]; 6];
        assert_eq!(inertia(&zero, 0.0).unwrap(), (0, 0, 6));
        let mut d = zero.clone();
        d[0][0] = Rational::from_i64(1);
        d[1][1] = Rational::from_i64(-1);
        d[2][2] = Rational::from_i64(1);
        assert_eq!(inertia(&d, 0.0).unwrap(), (2, 1, 3));
        assert_eq!(inertia(&qm(&[&[0, 1], &[2, 0]]), 0.0), Err(Error::NotSymmetric));
    }
}
