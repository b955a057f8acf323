//! Small dense square matrices over a [`Scalar`] field.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Row-major `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    d: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
        }
        Ok(Mat { d, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix from its columns.
    pub fn from_cols(cols: &[Vec<T>]) -> Self {
        let d = cols.len();
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for c in cols {
                data.push(c[i].clone());
            }
        }
        Mat { d, data }
    }

    pub fn identity(d: usize) -> Self {
        Self::diag(&vec![T::one(); d])
    }

    pub fn zeros(d: usize) -> Self {
        Mat { d, data: vec![T::zero(); d * d] }
    }

    pub fn diag(entries: &[T]) -> Self {
        let d = entries.len();
        let mut m = Self::zeros(d);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.d).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn cols(&self) -> Vec<Vec<T>> {
        (0..self.d).map(|j| self.col(j)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.d).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.d;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = &self[(i, k)];
                if a.vanishes() {
                    continue;
                }
                for j in 0..d {
                    let prod = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.d)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    pub fn scale(&self, s: &T) -> Self {
        Mat { d: self.d, data: self.data.iter().map(|x| x.clone() * s.clone()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Mat {
            d: self.d,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    /// `self^n` by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.d);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Determinant by Gaussian elimination with largest-magnitude pivoting.
    pub fn det(&self) -> T {
        let d = self.d;
        let mut a = self.clone();
        let mut det = T::one();
        for c in 0..d {
            let p = match pivot_row(&a, c) {
                Some(p) => p,
                None => return T::zero(),
            };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let pv = a[(c, c)].clone();
            det = det * pv.clone();
            for r in c + 1..d {
                let f = a[(r, c)].clone() / pv.clone();
                if f.vanishes() {
                    continue;
                }
                for k in c..d {
                    let v = a[(r, k)].clone() - f.clone() * a[(c, k)].clone();
                    a[(r, k)] = v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.d;
        let mut a = self.clone();
        let mut inv = Self::identity(d);
        for c in 0..d {
            let p = pivot_row(&a, c).ok_or(Error::SingularMatrix)?;
            if p != c {
                a.swap_rows(p, c);
                inv.swap_rows(p, c);
            }
            let pv = a[(c, c)].clone();
            for k in 0..d {
                a[(c, k)] = a[(c, k)].clone() / pv.clone();
                inv[(c, k)] = inv[(c, k)].clone() / pv.clone();
            }
            for r in 0..d {
                if r == c {
                    continue;
                }
                let f = a[(r, c)].clone();
                if f.vanishes() {
                    continue;
                }
                for k in 0..d {
                    a[(r, k)] = a[(r, k)].clone() - f.clone() * a[(c, k)].clone();
                    inv[(r, k)] = inv[(r, k)].clone() - f.clone() * inv[(c, k)].clone();
                }
            }
        }
        Ok(inv)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.d {
            self.data.swap(a * self.d + k, b * self.d + k);
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { d: self.d, data: self.data.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.d).all(|i| (0..self.d).all(|j| i == j || self[(i, j)].vanishes()))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.d).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Frobenius norm as `f64`.
    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| {
            let v = x.to_f64();
            v * v
        }).sum())
    }
}

impl Mat<Rational> {
    /// True when every entry is an integer.
    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Entries as big integers; `None` unless [`Mat::is_integer`].
    pub fn to_integer_rows(&self) -> Option<Vec<Vec<BigInt>>> {
        if !self.is_integer() {
            return None;
        }
        Some(self.rows().into_iter().map(|r| r.into_iter().map(|x| x.to_integer()).collect()).collect())
    }

    /// Adjugate of an integer matrix (`adj(A) = det(A) A^{-1}`), exact.
    pub fn adjugate(&self) -> Result<Self> {
        let det = self.det();
        if det.vanishes() {
            return Err(Error::SingularMatrix);
        }
        Ok(self.inverse()?.scale(&det))
    }
}

fn pivot_row<T: Scalar>(a: &Mat<T>, c: usize) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for r in c..a.d {
        let v = a[(r, c)].abs_val();
        if v.vanishes() {
            continue;
        }
        if T::EXACT {
            return Some(r);
        }
        match &best {
            Some((_, b)) if *b >= v => {}
            _ => best = Some((r, v)),
        }
    }
    best.map(|(r, _)| r)
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s = s + x.clone() * y.clone();
    }
    s
}

pub fn norm_sq<T: Scalar>(v: &[T]) -> T {
    dot(v, v)
}

/// `sum_j coeffs[j] * vectors[j]` with integer coefficients.
pub fn combine<T: Scalar>(vectors: &[Vec<T>], coeffs: &[BigInt]) -> Vec<T> {
    let d = vectors[0].len();
    let mut out = vec![T::zero(); d];
    for (v, c) in vectors.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        let cf = T::from_bigint(c);
        for i in 0..d {
            out[i] = out[i].clone() + cf.clone() * v[i].clone();
        }
    }
    out
}

/// Rank of a list of vectors (exact for rationals).
pub fn rank<T: Scalar>(vectors: &[Vec<T>]) -> usize {
    let mut rows: Vec<Vec<T>> = vectors.to_vec();
    if rows.is_empty() {
        return 0;
    }
    let d = rows[0].len();
    let mut r = 0;
    for c in 0..d {
        let p = (r..rows.len()).find(|&i| !rows[i][c].vanishes());
        let Some(p) = p else { continue };
        rows.swap(r, p);
        let pv = rows[r][c].clone();
        for i in r + 1..rows.len() {
            let f = rows[i][c].clone() / pv.clone();
            if f.vanishes() {
                continue;
            }
            for k in c..d {
                rows[i][k] = rows[i][k].clone() - f.clone() * rows[r][k].clone();
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Rank of integer vectors, computed exactly.
pub fn integer_rank(vectors: &[Vec<BigInt>]) -> usize {
    let rows: Vec<Vec<Rational>> = vectors
        .iter()
        .map(|v| v.iter().map(|x| Rational::from_integer(x.clone())).collect())
        .collect();
    rank(&rows)
}

/// Absolute value of the determinant of a list of integer vectors.
pub fn integer_abs_det(vectors: &[Vec<BigInt>]) -> BigInt {
    let m = Mat::from_rows(
        vectors.iter().map(|v| v.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect(),
    )
    .expect("square");
    m.det().to_integer().abs()
}

impl<T> core::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.d + j]
    }
}

impl<T> core::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.d + j]
    }
}
