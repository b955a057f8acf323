//! Preimage sets `F_n(y) = {x in [0,1)^d : A_n x = y (mod 1)}` and membership in `W_n(psi)`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};
use crate::spectra::{generate_matrix, DiagonalSpec, FamilyKind, Matrix, MatrixFamily, PsiSpec};

/// Default cap on the number of enumerated preimages.
pub const PREIMAGE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreimageMethod {
    /// `((y_j + k_j) / a_j)` for diagonal `A_n`.
    DiagonalGrid,
    /// `(A^{-n} y + k) / lambda^n` for `(lambda A)^n` with unimodular `A`.
    ScaledGrid,
    /// Integer points of `A_n [0,1)^d - y`, sliced along the last coordinate.
    Slicing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreimageSet {
    pub n: u64,
    pub target: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// Exact coordinates, present when `A_n` is held exactly.
    pub exact_points: Option<Vec<Vec<Rational>>>,
    /// `|det A_n|` when `A_n` is an integer matrix.
    pub exact_count: Option<BigInt>,
    pub method: PreimageMethod,
}

impl PreimageSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Distance from `t` to the nearest integer.
pub fn dist_to_int(t: f64) -> f64 {
    libm::fabs(t - libm::round(t))
}

/// `||v||_d = sqrt(sum ||v_i||^2)` on the torus.
pub fn torus_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|t| dist_to_int(*t) * dist_to_int(*t)).sum())
}

fn exact_torus_norm(v: &[Rational]) -> f64 {
    libm::sqrt(
        v.iter()
            .map(|t| {
                let r = Scalar::to_f64(&(t - Rational::from_integer(t.round_int())));
                r * r
            })
            .sum(),
    )
}

fn rational_target(y: &[f64]) -> Vec<Rational> {
    y.iter().map(|t| Rational::from_f64(*t)).collect()
}

fn check_target(y: &[f64], d: usize) -> Result<()> {
    if y.len() != d {
        return Err(Error::InvalidInput(alloc::format!("target has {} coordinates, expected {d}", y.len())));
    }
    if y.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("target must be finite".into()));
    }
    Ok(())
}

/// Integer matrix data for the slicing enumerator: `x = adj (q m + Y) / (q det)`.
struct IntSlicer {
    d: usize,
    a: Vec<Vec<i128>>,
    adj: Vec<Vec<i128>>,
    sign: i128,
    det_abs: i128,
    q: i128,
    y: Vec<i128>,
}

fn to_i128(v: &BigInt) -> Result<i128> {
    v.to_i128().ok_or_else(|| Error::NumericalFailure("integer entries exceed 128 bits".into()))
}

fn floor_div(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

fn overflow() -> Error {
    Error::NumericalFailure("preimage enumeration overflows 128-bit arithmetic".into())
}

impl IntSlicer {
    fn new(a: &Mat<Rational>, y: &[Rational]) -> Result<Self> {
        let rows = a.to_integer_rows().ok_or_else(|| Error::InvalidInput("matrix is not integer".into()))?;
        let det = a.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let adj = a.adjugate()?.to_integer_rows().expect("adjugate of an integer matrix is integer");
        let q = y.iter().fold(BigInt::from(1), |acc, t| acc.lcm(t.denom()));
        let yq: Vec<i128> = y.iter().map(|t| to_i128(&(t * Rational::from_integer(q.clone())).to_integer())).collect::<Result<_>>()?;
        let det = det.to_integer();
        Ok(IntSlicer {
            d: a.dim(),
            a: rows.iter().map(|r| r.iter().map(to_i128).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?,
            adj: adj.iter().map(|r| r.iter().map(to_i128).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?,
            sign: if det.is_negative() { -1 } else { 1 },
            det_abs: to_i128(&det.abs())?,
            q: to_i128(&q)?,
            y: yq,
        })
    }

    /// Visits every `m` with `A_n^{-1}(m + y)` in `[0,1)^d`; returns the count.
    fn visit(&self, budget: u64, mut f: impl FnMut(&[i128])) -> Result<u128> {
        let d = self.d;
        let bound = self.q.checked_mul(self.det_abs).ok_or_else(overflow)?;
        // m_k ranges over the image of the unit cube, shifted by -y
        let mut lo = vec![0i128; d];
        let mut hi = vec![0i128; d];
        for k in 0..d {
            let neg: i128 = self.a[k].iter().filter(|v| **v < 0).sum();
            let pos: i128 = self.a[k].iter().filter(|v| **v > 0).sum();
            lo[k] = neg - ceil_div(self.y[k], self.q) - 1;
            hi[k] = pos - floor_div(self.y[k], self.q) + 1;
        }
        let outer: u128 = (0..d - 1).map(|k| (hi[k] - lo[k] + 1) as u128).product();
        if outer > 50 * budget as u128 + 1_000_000 {
            return Err(Error::BudgetExceeded { budget, lower_bound: None });
        }
        let mut m = lo.clone();
        let mut count: u128 = 0;
        let last = d - 1;
        loop {
            // t_i = sign * (adj (q m + Y))_i = base_i + c_i m_last
            let mut range = (i128::MIN, i128::MAX);
            for i in 0..d {
                let mut base = 0i128;
                for k in 0..d {
                    let coord = if k == last { self.y[k] } else { self.q.checked_mul(m[k]).and_then(|v| v.checked_add(self.y[k])).ok_or_else(overflow)? };
                    base = base.checked_add(self.adj[i][k].checked_mul(coord).ok_or_else(overflow)?).ok_or_else(overflow)?;
                }
                base *= self.sign;
                let c = self.sign * self.q.checked_mul(self.adj[i][last]).ok_or_else(overflow)?;
                // 0 <= base + c t <= bound - 1
                let (l, h) = if c == 0 {
                    if base >= 0 && base < bound {
                        (i128::MIN, i128::MAX)
                    } else {
                        (1, 0)
                    }
                } else if c > 0 {
                    (ceil_div(-base, c), floor_div(bound - 1 - base, c))
                } else {
                    (ceil_div(bound - 1 - base, c), floor_div(-base, c))
                };
                range = (range.0.max(l), range.1.min(h));
            }
            if range.0 <= range.1 {
                if range.0 == i128::MIN || range.1 == i128::MAX {
                    return Err(Error::NumericalFailure("unbounded preimage slice".into()));
                }
                count += (range.1 - range.0 + 1) as u128;
                if count > budget as u128 {
                    return Err(Error::BudgetExceeded { budget, lower_bound: None });
                }
                for t in range.0..=range.1 {
                    m[last] = t;
                    f(&m);
                }
            }
            // advance the outer odometer
            let mut k = 0;
            loop {
                if k == last {
                    return Ok(count);
                }
                m[k] += 1;
                if m[k] <= hi[k] {
                    break;
                }
                m[k] = lo[k];
                k += 1;
            }
        }
    }

    fn point(&self, m: &[i128]) -> Vec<Rational> {
        let den = BigInt::from(self.q) * BigInt::from(self.det_abs) * BigInt::from(self.sign);
        (0..self.d)
            .map(|i| {
                let num: BigInt = (0..self.d)
                    .map(|k| BigInt::from(self.adj[i][k]) * (BigInt::from(self.q) * BigInt::from(m[k]) + BigInt::from(self.y[k])))
                    .sum();
                Rational::new(num, den.clone())
            })
            .collect()
    }
}

/// `#F_n(y)` by exact slicing, without storing points. Requires an integer `A_n`.
pub fn count_preimages(family: &MatrixFamily, n: u64, y: &[f64], budget: u64) -> Result<u128> {
    check_target(y, family.d)?;
    let a = generate_matrix(family, n)?;
    let a = a.as_exact().ok_or_else(|| Error::InvalidInput("exact counting needs an exact family".into()))?;
    IntSlicer::new(a, &rational_target(y))?.visit(budget, |_| {})
}

fn diagonal_entries(family: &MatrixFamily, a: &Matrix) -> Option<Vec<f64>> {
    match &family.kind {
        FamilyKind::Diagonal(DiagonalSpec::Base(_)) | FamilyKind::Diagonal(DiagonalSpec::Rates(_)) | FamilyKind::Diagonal(DiagonalSpec::Sequence(_)) => {
            let m = a.to_f64();
            Some((0..m.dim()).map(|i| m[(i, i)]).collect())
        }
        _ => None,
    }
}

fn grid_product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for v in axis {
                let mut q = p.clone();
                q.push(*v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn grid_product_exact(axes: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for v in axis {
                let mut q = p.clone();
                q.push(v.clone());
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// `{(w + k)/s : k integer} ∩ [0,1)` for `s != 0`, exactly.
fn axis_exact(w: &Rational, s: &Rational) -> Vec<Rational> {
    let (w, s) = if s.is_negative() { (-w.clone(), -s.clone()) } else { (w.clone(), s.clone()) };
    // 0 <= w + k < s
    let k0 = (-w.clone()).ceil().to_integer();
    let k1 = (s.clone() - w.clone()).ceil().to_integer();
    let mut out = Vec::new();
    let mut k = k0;
    while k < k1 {
        out.push((w.clone() + Rational::from_integer(k.clone())) / s.clone());
        k += 1;
    }
    out
}

fn axis_float(w: f64, s: f64) -> Vec<f64> {
    let (w, s) = if s < 0.0 { (-w, -s) } else { (w, s) };
    let k0 = libm::ceil(-w) as i64;
    let k1 = libm::ceil(s - w) as i64;
    (k0..k1).map(|k| (w + k as f64) / s).filter(|x| (0.0..1.0).contains(x)).collect()
}

/// Enumerates `F_n(y)` with the closed forms where they apply and exact slicing otherwise.
pub fn enumerate_preimages(family: &MatrixFamily, n: u64, y: &[f64], budget: u64) -> Result<PreimageSet> {
    check_target(y, family.d)?;
    let a = generate_matrix(family, n)?;
    let ln_det = a.ln_abs_det()?;
    if ln_det > libm::log(budget as f64) + 1e-9 {
        return Err(Error::BudgetExceeded { budget, lower_bound: None });
    }
    let yq = rational_target(y);
    let exact_count = a.as_exact().filter(|m| m.is_integer()).map(|m| m.det().to_integer().abs());
    let make = |points: Vec<Vec<f64>>, exact_points: Option<Vec<Vec<Rational>>>, method| PreimageSet {
        n,
        target: y.to_vec(),
        points,
        exact_points,
        exact_count: exact_count.clone(),
        method,
    };

    if let Some(diag) = diagonal_entries(family, &a) {
        return Ok(match a.as_exact() {
            Some(m) => {
                let axes: Vec<Vec<Rational>> = (0..m.dim()).map(|i| axis_exact(&yq[i], &m[(i, i)])).collect();
                let exact = grid_product_exact(&axes);
                make(exact.iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect(), Some(exact), PreimageMethod::DiagonalGrid)
            }
            None => {
                let axes: Vec<Vec<f64>> = diag.iter().zip(y).map(|(s, w)| axis_float(*w, *s)).collect();
                make(grid_product(&axes), None, PreimageMethod::DiagonalGrid)
            }
        });
    }

    if let FamilyKind::ScaledPower { lambda, base } = &family.kind {
        // A^{-n} Z^d = Z^d, so x = (A^{-n} y + k) / lambda^n
        let w = base.inverse()?.pow(n).mul_vec(&yq);
        let s = Rational::from_integer(num_traits::pow(BigInt::from(*lambda), n as usize));
        let axes: Vec<Vec<Rational>> = w.iter().map(|wi| axis_exact(wi, &s)).collect();
        let exact = grid_product_exact(&axes);
        return Ok(make(exact.iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect(), Some(exact), PreimageMethod::ScaledGrid));
    }

    match &a {
        Matrix::Exact(m) if m.is_integer() => {
            let slicer = IntSlicer::new(m, &yq)?;
            let mut exact = Vec::new();
            slicer.visit(budget, |mv| exact.push(slicer.point(mv)))?;
            let points = exact.iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect();
            Ok(make(points, Some(exact), PreimageMethod::Slicing))
        }
        Matrix::Exact(m) => {
            // clear denominators: B = c A_n is integer
            let c = (0..m.dim())
                .flat_map(|i| (0..m.dim()).map(move |j| (i, j)))
                .fold(BigInt::from(1), |acc, (i, j)| acc.lcm(m[(i, j)].denom()));
            let cz = Rational::from_integer(c);
            let b = m.scale(&cz);
            let cy: Vec<Rational> = yq.iter().map(|t| t * &cz).collect();
            // B x = m' + c y covers every coset; keep m' divisible by c
            let slicer = IntSlicer::new(&b, &cy)?;
            let mut exact = Vec::new();
            slicer.visit(budget.saturating_mul(64), |mv| {
                let x = slicer.point(mv);
                let ax = m.mul_vec(&x);
                if ax.iter().zip(&yq).all(|(u, t)| (u - t).is_integer()) {
                    exact.push(x);
                }
            })?;
            let points = exact.iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect();
            Ok(make(points, Some(exact), PreimageMethod::Slicing))
        }
        Matrix::Float(m) => Ok(make(float_slicing(m, y, budget)?, None, PreimageMethod::Slicing)),
    }
}

fn float_slicing(a: &Mat<f64>, y: &[f64], budget: u64) -> Result<Vec<Vec<f64>>> {
    let d = a.dim();
    let inv = a.inverse()?;
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    for k in 0..d {
        let neg: f64 = a.row(k).iter().filter(|v| **v < 0.0).sum();
        let pos: f64 = a.row(k).iter().filter(|v| **v > 0.0).sum();
        lo[k] = libm::floor(neg - y[k]) as i64 - 1;
        hi[k] = libm::ceil(pos - y[k]) as i64 + 1;
    }
    let outer: f64 = (0..d - 1).map(|k| (hi[k] - lo[k] + 1) as f64).product();
    if outer > 50.0 * budget as f64 + 1e6 {
        return Err(Error::BudgetExceeded { budget, lower_bound: None });
    }
    let last = d - 1;
    let mut m = lo.clone();
    let mut out = Vec::new();
    loop {
        let mut range = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..d {
            let base: f64 = (0..last).map(|k| inv[(i, k)] * (m[k] as f64 + y[k])).sum::<f64>() + inv[(i, last)] * y[last];
            let c = inv[(i, last)];
            if c.abs() < 1e-300 {
                if !(0.0..1.0).contains(&base) {
                    range = (1.0, 0.0);
                }
                continue;
            }
            let (l, h) = if c > 0.0 { (-base / c, (1.0 - base) / c) } else { ((1.0 - base) / c, -base / c) };
            range = (range.0.max(l), range.1.min(h));
        }
        if range.0 <= range.1 {
            for t in (libm::floor(range.0) as i64 - 1)..=(libm::ceil(range.1) as i64 + 1) {
                m[last] = t;
                let shifted: Vec<f64> = (0..d).map(|k| m[k] as f64 + y[k]).collect();
                let x = inv.mul_vec(&shifted);
                if x.iter().all(|v| (0.0..1.0).contains(v)) {
                    out.push(x);
                    if out.len() as u64 > budget {
                        return Err(Error::BudgetExceeded { budget, lower_bound: None });
                    }
                }
            }
        }
        let mut k = 0;
        loop {
            if k == last {
                return Ok(out);
            }
            m[k] += 1;
            if m[k] <= hi[k] {
                break;
            }
            m[k] = lo[k];
            k += 1;
        }
    }
}

/// Largest `||A_n x - y||_d` over the set; exactly 0 in rational mode.
pub fn preimage_residual(family: &MatrixFamily, set: &PreimageSet) -> Result<f64> {
    let a = generate_matrix(family, set.n)?;
    let y = rational_target(&set.target);
    match (&a, &set.exact_points) {
        (Matrix::Exact(m), Some(points)) => Ok(points
            .iter()
            .map(|p| {
                let r: Vec<Rational> = m.mul_vec(p).into_iter().zip(&y).map(|(u, t)| u - t).collect();
                exact_torus_norm(&r)
            })
            .fold(0.0, f64::max)),
        _ => {
            let m = a.to_f64();
            Ok(set
                .points
                .iter()
                .map(|p| {
                    let r: Vec<f64> = m.mul_vec(p).into_iter().zip(&set.target).map(|(u, t)| u - t).collect();
                    torus_norm(&r)
                })
                .fold(0.0, f64::max))
        }
    }
}

/// `||A_n x - y||_d < psi(n)`, with `A_n x` formed exactly when the family is exact.
pub fn wn_membership(x: &[f64], family: &MatrixFamily, psi: &PsiSpec, n: u64, y: &[f64]) -> Result<bool> {
    check_target(y, family.d)?;
    check_target(x, family.d)?;
    let a = generate_matrix(family, n)?;
    let ln_psi = psi.ln_at(n)?;
    let dist = match &a {
        Matrix::Exact(m) => {
            let xr = rational_target(x);
            let r: Vec<Rational> = m.mul_vec(&xr).into_iter().zip(rational_target(y)).map(|(u, t)| u - t).collect();
            exact_torus_norm(&r)
        }
        Matrix::Float(m) => {
            let r: Vec<f64> = m.mul_vec(x).into_iter().zip(y).map(|(u, t)| u - t).collect();
            torus_norm(&r)
        }
    };
    Ok(dist == 0.0 || libm::log(dist) < ln_psi)
}

/// Membership decided from the ellipsoids `z + A_n^{-1} B(0, psi(n))`, `z` in the preimage set,
/// unwrapped over the neighbouring integer shifts.
pub fn membership_by_preimages(x: &[f64], a_n: &Mat<f64>, set: &PreimageSet, psi_n: f64) -> bool {
    let d = x.len();
    let shifts = 3usize.pow(d as u32);
    set.points.iter().any(|z| {
        (0..shifts).any(|s| {
            let mut code = s;
            let diff: Vec<f64> = (0..d)
                .map(|i| {
                    let w = (code % 3) as f64 - 1.0;
                    code /= 3;
                    x[i] - z[i] - w
                })
                .collect();
            let img = a_n.mul_vec(&diff);
            libm::sqrt(img.iter().map(|v| v * v).sum()) < psi_n
        })
    })
}
