//! Column Hermite normal form by extended-gcd column operations.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Rational;

pub type IntMat = Vec<Vec<BigInt>>;

/// Reduces the rows of `c` (`m x d`, rank `m`) by unimodular column operations.
///
/// Returns `(h, v)` with `c * v = [h | 0]`, `h` lower triangular (`m x m`) with positive
/// diagonal and entries left of the diagonal reduced into `[0, h_rr)`.
pub fn column_hnf(c: &[Vec<BigInt>], d: usize) -> Result<(IntMat, IntMat)> {
    let m = c.len();
    let mut a: IntMat = c.to_vec();
    let mut v: IntMat = identity(d);
    for r in 0..m {
        for j in r + 1..d {
            if a[r][j].is_zero() {
                continue;
            }
            let (x, y) = (a[r][r].clone(), a[r][j].clone());
            let eg = x.extended_gcd(&y);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let (xg, yg) = (&x / &g, &y / &g);
            // [col_r, col_j] <- [s col_r + t col_j, -yg col_r + xg col_j], determinant 1
            column_op(&mut a, r, j, &s, &t, &-yg.clone(), &xg);
            column_op(&mut v, r, j, &s, &t, &-yg, &xg);
        }
        if a[r][r].is_zero() {
            return Err(Error::InvalidInput("rows are linearly dependent".into()));
        }
        if a[r][r].is_negative() {
            negate_column(&mut a, r);
            negate_column(&mut v, r);
        }
        let p = a[r][r].clone();
        for j in 0..r {
            let q = a[r][j].div_floor(&p);
            if !q.is_zero() {
                // col_j -= q col_r
                for row in a.iter_mut().chain(v.iter_mut()) {
                    let t = &row[r] * &q;
                    row[j] -= t;
                }
            }
        }
    }
    let h = a.iter().map(|row| row[..m].to_vec()).collect();
    Ok((h, v))
}

fn column_op(a: &mut IntMat, r: usize, j: usize, s: &BigInt, t: &BigInt, u: &BigInt, w: &BigInt) {
    for row in a.iter_mut() {
        let (cr, cj) = (row[r].clone(), row[j].clone());
        row[r] = s * &cr + t * &cj;
        row[j] = u * &cr + w * &cj;
    }
}

fn negate_column(a: &mut IntMat, r: usize) {
    for row in a.iter_mut() {
        row[r] = -row[r].clone();
    }
}

pub fn identity(d: usize) -> IntMat {
    (0..d).map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

/// Exact inverse of a unimodular integer matrix.
pub fn unimodular_inverse(v: &[Vec<BigInt>]) -> Result<IntMat> {
    let m = Mat::from_rows(v.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect())?;
    let inv = m.inverse()?;
    inv.to_integer_rows().ok_or_else(|| Error::NumericalFailure("matrix is not unimodular".into()))
}

pub fn int_mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> IntMat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = alloc::vec![alloc::vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}
