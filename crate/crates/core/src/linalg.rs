//! Exact matrix kernels over `BigInt` and `BigRational`.
//!
//! Everything here works on plain row vectors; the lattice layer wraps these
//! with labels and Gram matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub(crate) fn big_rows(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

pub(crate) fn to_i64(v: &BigInt) -> Result<i64> {
    v.to_i64().ok_or(Error::Overflow)
}

pub(crate) fn to_i64_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter().map(to_i64).collect()
}

/// Unimodular row reduction of the leading `ncols` columns. Operations are
/// applied to entire rows, so trailing columns act as an augmentation that
/// records the transform. Returns the pivot `(row, col)` positions.
pub(crate) fn integer_echelon(rows: &mut [Vec<BigInt>], ncols: usize) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        if top == rows.len() {
            break;
        }
        loop {
            // Smallest nonzero magnitude in this column at or below `top`.
            let best = (top..rows.len())
                .filter(|&r| !rows[r][col].is_zero())
                .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let Some(best) = best else { break };
            rows.swap(top, best);
            let mut done = true;
            for r in top + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let q = rows[r][col].div_floor(&rows[top][col]);
                let (head, tail) = rows.split_at_mut(r);
                let pivot_row = &head[top];
                for (x, p) in tail[0].iter_mut().zip(pivot_row) {
                    *x -= &q * p;
                }
                if !tail[0][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !rows[top][col].is_zero() {
            pivots.push((top, col));
            top += 1;
        }
    }
    pivots
}

/// Hermite normal form of the row lattice spanned by `rows`; zero rows are
/// dropped. Pivots are positive and entries above each pivot are reduced into
/// `[0, pivot)`, which makes the result canonical for the lattice.
pub(crate) fn row_hnf(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let pivots = integer_echelon(&mut rows, ncols);
    for &(r, c) in &pivots {
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        for above in 0..r {
            let q = rows[above][c].div_floor(&rows[r][c]);
            if q.is_zero() {
                continue;
            }
            let (head, tail) = rows.split_at_mut(r);
            for (x, p) in head[above].iter_mut().zip(&tail[0]) {
                *x -= &q * p;
            }
        }
    }
    rows.truncate(pivots.len());
    rows
}

/// Saturated basis of `{x in Z^ncols : M x = 0}`, in Hermite normal form.
pub(crate) fn integer_kernel(m: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    // Rows of [M^T | I]; a row whose M^T part reduces to zero carries a kernel
    // vector in its identity part. The transform is unimodular, so the kernel
    // rows span the full integer kernel.
    let mrows = m.len();
    let mut aug: Vec<Vec<BigInt>> = (0..ncols)
        .map(|j| {
            let mut row: Vec<BigInt> = m.iter().map(|r| r[j].clone()).collect();
            row.extend((0..ncols).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let pivots = integer_echelon(&mut aug, mrows);
    let kernel: Vec<Vec<BigInt>> = aug[pivots.len()..]
        .iter()
        .map(|row| row[mrows..].to_vec())
        .collect();
    if kernel.is_empty() {
        return kernel;
    }
    row_hnf(kernel)
}

/// Reduced row echelon form over Q. Returns pivot columns.
pub(crate) fn rref(rows: &mut [Vec<BigRational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        if top == rows.len() {
            break;
        }
        let Some(p) = (top..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(top, p);
        let inv = rows[top][col].recip();
        for x in rows[top].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows.len() {
            if r == top || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            let pivot_row = rows[top].clone();
            for (x, p) in rows[r].iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        pivots.push(col);
        top += 1;
    }
    pivots
}

pub(crate) fn rational_rows(rows: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|v| BigRational::from_integer(v.clone())).collect())
        .collect()
}

/// Determinant by fraction-free (Bareiss) elimination.
pub(crate) fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Inertia `(positive, negative, zero)` of a symmetric integer matrix, by
/// congruence diagonalization over Q.
pub(crate) fn inertia(gram: &[Vec<i64>]) -> (usize, usize, usize) {
    let n = gram.len();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || gram[i][j] == 0));
    if diagonal {
        let pos = (0..n).filter(|&i| gram[i][i] > 0).count();
        let neg = (0..n).filter(|&i| gram[i][i] < 0).count();
        return (pos, neg, n - pos - neg);
    }
    let mut a = rational_rows(&big_rows(gram));
    let (mut pos, mut neg) = (0, 0);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !a[i][i].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => {
                // Zero diagonal: find an off-diagonal entry and add row/col j
                // to row/col i so that the (i, i) entry becomes 2 a_ij.
                let pair = active.iter().find_map(|&i| {
                    active
                        .iter()
                        .copied()
                        .find(|&j| j != i && !a[i][j].is_zero())
                        .map(|j| (i, j))
                });
                let Some((i, j)) = pair else { break };
                for k in 0..n {
                    let v = a[j][k].clone();
                    a[i][k] += v;
                }
                for k in 0..n {
                    let v = a[k][j].clone();
                    a[k][i] += v;
                }
                i
            }
        };
        let d = a[pivot][pivot].clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        active.retain(|&i| i != pivot);
        for &i in &active {
            if a[i][pivot].is_zero() {
                continue;
            }
            let f = &a[i][pivot] / &d;
            for &j in &active {
                let v = &f * &a[pivot][j];
                a[i][j] -= v;
            }
            a[i][pivot] = BigRational::zero();
            a[pivot][i] = BigRational::zero();
        }
    }
    (pos, neg, n - pos - neg)
}
