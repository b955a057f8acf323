//! Intervals cut by `W_n(psi)` on a vertical fiber `{x} x [0,1)` for `(lambda A)^n`, `A` symmetric
//! and unimodular.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::dimension::formulas::formula_counterexample;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};
use crate::spectra::PsiSpec;

use super::least_squares;

/// Part of the fiber that is examined: `y in [start, start + length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberWindow {
    pub start: Rational,
    pub length: f64,
}

impl FiberWindow {
    pub fn full() -> Self {
        FiberWindow { start: Rational::from_i64(0), length: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberStructure {
    pub x: f64,
    pub n: u64,
    pub tau_n: f64,
    /// `(l_1, l_2)`: logs of the eigenvalue moduli of `lambda A`.
    pub l: [f64; 2],
    pub window: FiberWindow,
    /// Intervals as offsets from the window start, sorted and pairwise disjoint.
    pub intervals: Vec<(f64, f64)>,
    pub count: usize,
    /// Smallest gap between consecutive intervals (wrapping around for the full fiber).
    pub min_gap: f64,
    /// `sin alpha`, `alpha` the angle between the vertical and the contracting eigenvector.
    pub sin_alpha: f64,
    /// Interval lengths divided by `e^{-n(l_2 + tau_n)}`: (smallest, largest).
    pub length_ratio: (f64, f64),
    /// `ceil(c_L e^{n(l_2 - tau_n)})`.
    pub count_bound: f64,
}

fn overflow() -> Error {
    Error::NumericalFailure("fiber computation overflows 128-bit arithmetic".into())
}

fn int_matrix_power(lambda: i64, a: &Mat<Rational>, n: u64) -> Result<[[i128; 2]; 2]> {
    let m = a.pow(n).scale(&Rational::from_integer(num_traits::pow(BigInt::from(lambda), n as usize)));
    let rows = m.to_integer_rows().ok_or_else(|| Error::InvalidInput("matrix is not integer".into()))?;
    let g = |i: usize, j: usize| rows[i][j].to_i128().ok_or_else(overflow);
    Ok([[g(0, 0)?, g(0, 1)?], [g(1, 0)?, g(1, 1)?]])
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(overflow)
}

fn sub(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b).ok_or_else(overflow)
}

/// Vertical-fiber intervals of `W_n(psi)` (target 0) inside the window, keeping only intervals of
/// length at least `e^{-n(l_2 + tau_n)}/2`.
pub fn fiber_intervals(
    lambda: i64,
    a: &Mat<Rational>,
    x: &Rational,
    n: u64,
    psi: &PsiSpec,
    window: &FiberWindow,
) -> Result<FiberStructure> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let tau_n = psi.tau_n(n)?;
    let ce = formula_counterexample(lambda, a, tau_n)?;
    let [l1, l2] = ce.l;
    if !(tau_n < (l2 - l1) / 2.0) {
        return Err(Error::InvalidCounterexampleFamily(alloc::format!(
            "tau_n = {tau_n} must be below (l_2 - l_1)/2 = {}",
            (l2 - l1) / 2.0
        )));
    }
    if !(window.length > 0.0 && window.length <= 1.0) {
        return Err(Error::InvalidInput("window length must lie in (0, 1]".into()));
    }
    let psi_n = psi.at(n)?;
    if !(psi_n < 0.5) {
        return Err(Error::InvalidInput("psi(n) must be below 1/2".into()));
    }
    let an = int_matrix_power(lambda, a, n)?;
    let v = [an[0][1], an[1][1]];
    // exact base point: Q P = A_n (Q x, Q y_s)
    let qb: BigInt = x.denom().lcm(window.start.denom());
    let q = qb.to_i128().ok_or_else(overflow)?;
    let qx = (x * Rational::from_integer(qb.clone())).to_integer().to_i128().ok_or_else(overflow)?;
    let qy = (&window.start * Rational::from_integer(qb)).to_integer().to_i128().ok_or_else(overflow)?;
    let qp = [
        mul(an[0][0], qx)?.checked_add(mul(an[0][1], qy)?).ok_or_else(overflow)?,
        mul(an[1][0], qx)?.checked_add(mul(an[1][1], qy)?).ok_or_else(overflow)?,
    ];
    let v_sq = mul(v[0], v[0])?.checked_add(mul(v[1], v[1])?).ok_or_else(overflow)?;
    let v_norm = libm::sqrt(v_sq as f64);
    let (ax, bx) = if v[0].abs() >= v[1].abs() { (0usize, 1usize) } else { (1, 0) };
    let len_unit = libm::exp(-(n as f64) * (l2 + tau_n));
    let c_l = window.length;

    // integer m_a spanned by the segment {P + u v : u in [0, c_L]}, padded by one
    let pa = qp[ax] as f64 / q as f64;
    let ea = pa + c_l * v[ax] as f64;
    let (lo_a, hi_a) = (libm::floor(pa.min(ea)) as i128 - 2, libm::ceil(pa.max(ea)) as i128 + 2);
    if (hi_a - lo_a) as f64 > 5e8 {
        return Err(Error::BudgetExceeded { budget: 500_000_000, lower_bound: None });
    }
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for ma in lo_a..=hi_a {
        // b-coordinate of the line at m_a: (Q P_b v_a + (Q m_a - Q P_a) v_b) / (Q v_a)
        let da = sub(mul(q, ma)?, qp[ax])?;
        let num = mul(qp[bx], v[ax])?.checked_add(mul(da, v[bx])?).ok_or_else(overflow)?;
        let centre = Integer::div_floor(&num, &mul(q, v[ax])?);
        for mb in centre - 2..=centre + 3 {
            let mut m = [0i128; 2];
            m[ax] = ma;
            m[bx] = mb;
            let w = [sub(mul(q, m[0])?, qp[0])?, sub(mul(q, m[1])?, qp[1])?];
            let cross = sub(mul(w[0], v[1])?, mul(w[1], v[0])?)?;
            let perp = cross as f64 / (q as f64 * v_norm);
            if perp.abs() >= psi_n {
                continue;
            }
            let dot = mul(w[0], v[0])?.checked_add(mul(w[1], v[1])?).ok_or_else(overflow)?;
            let u0 = dot as f64 / (q as f64 * v_sq as f64);
            let h = libm::sqrt(psi_n * psi_n - perp * perp) / v_norm;
            if 2.0 * h < 0.5 * len_unit {
                continue;
            }
            if u0 + h <= 0.0 || u0 - h >= c_l {
                continue;
            }
            intervals.push((u0 - h, u0 + h));
        }
    }
    intervals.sort_by(|p, q| p.0.total_cmp(&q.0));
    intervals.dedup();
    let mut min_gap = f64::INFINITY;
    for w in intervals.windows(2) {
        let gap = w[1].0 - w[0].1;
        if gap <= 0.0 {
            return Err(Error::NumericalFailure("fiber intervals overlap".into()));
        }
        min_gap = min_gap.min(gap);
    }
    if c_l >= 1.0 && intervals.len() > 1 {
        let wrap = intervals[0].0 + 1.0 - intervals[intervals.len() - 1].1;
        min_gap = min_gap.min(wrap);
    }
    let lengths = intervals.iter().map(|(a, b)| (b - a) / len_unit);
    let length_ratio = lengths.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let (_, vecs) = symmetric_eigen(&a.to_f64())?;
    // eigenvalues come ascending; the first column spans the contracting direction
    let sin_alpha = libm::fabs(vecs[(0, 0)]) / libm::sqrt(vecs[(0, 0)] * vecs[(0, 0)] + vecs[(1, 0)] * vecs[(1, 0)]);
    Ok(FiberStructure {
        x: Scalar::to_f64(x),
        n,
        tau_n,
        l: [l1, l2],
        window: window.clone(),
        count: intervals.len(),
        intervals,
        min_gap,
        sin_alpha,
        length_ratio,
        count_bound: libm::ceil(c_l * libm::exp(n as f64 * (l2 - tau_n))),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberScaling {
    pub rows: Vec<FiberStructure>,
    /// Slope of `ln min_gap` against `n`; expected `-(l_2 - tau)`.
    pub gap_exponent: f64,
    /// Slope of `ln(count / c_L)` against `n`; expected `l_2 - tau`.
    pub count_exponent: f64,
    /// `min_gap e^{n(l_2 - tau_n)}` per row.
    pub gap_constants: Vec<f64>,
    /// `count / (c_L e^{n(l_2 - tau_n)})` per row.
    pub count_constants: Vec<f64>,
}

/// Window length used at level `n`: about `target` intervals, and never below `2/lambda^n`.
pub fn scaling_window(lambda: i64, l2: f64, tau: f64, n: u64, target: f64) -> f64 {
    let want = target * libm::exp(-(n as f64) * (l2 - tau));
    let floor = 2.0 / libm::pow(lambda.unsigned_abs() as f64, n as f64);
    want.max(floor).min(1.0)
}

/// Gap and count exponents over `n_range`, each level examined in a window holding about `target`
/// intervals (the whole fiber when that is smaller).
pub fn fiber_scaling(
    lambda: i64,
    a: &Mat<Rational>,
    x: &Rational,
    psi: &PsiSpec,
    n_range: (u64, u64),
    target: f64,
) -> Result<FiberScaling> {
    let (n0, n1) = n_range;
    if n0 == 0 || n1 < n0 + 2 {
        return Err(Error::InvalidInput("need at least three levels".into()));
    }
    let mut rows = Vec::new();
    let (mut ns, mut gaps, mut counts) = (Vec::new(), Vec::new(), Vec::new());
    let (mut gap_c, mut count_c) = (Vec::new(), Vec::new());
    for n in n0..=n1 {
        let tau_n = psi.tau_n(n)?;
        let l2 = formula_counterexample(lambda, a, tau_n)?.l[1];
        let len = scaling_window(lambda, l2, tau_n, n, target);
        let window = FiberWindow { start: Rational::from_i64(0), length: len };
        let f = fiber_intervals(lambda, a, x, n, psi, &window)?;
        if f.count < 2 {
            return Err(Error::InsufficientResolution(alloc::format!("level {n} has fewer than two intervals")));
        }
        let scale = libm::exp(n as f64 * (l2 - tau_n));
        ns.push(n as f64);
        gaps.push(libm::log(f.min_gap));
        counts.push(libm::log(f.count as f64 / len));
        gap_c.push(f.min_gap * scale);
        count_c.push(f.count as f64 / (len * scale));
        rows.push(f);
    }
    let (gap_exponent, _, _) = least_squares(&ns, &gaps)?;
    let (count_exponent, _, _) = least_squares(&ns, &counts)?;
    Ok(FiberScaling { rows, gap_exponent, count_exponent, gap_constants: gap_c, count_constants: count_c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn base() -> Mat<Rational> {
        let q = Rational::from_i64;
        Mat::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(1)]]).unwrap()
    }

    #[test]
    fn full_fiber_small_n() {
        let x = Rational::new(3.into(), 10.into());
        let psi = PsiSpec::exponential(0.5);
        let f = fiber_intervals(5, &base(), &x, 3, &psi, &FiberWindow::full()).unwrap();
        let expected = libm::exp(3.0 * (f.l[1] - 0.5));
        assert!(f.count as f64 > 0.3 * expected && (f.count as f64) < 3.0 * expected, "{} vs {expected}", f.count);
        assert!(f.length_ratio.0 >= 0.5 && f.length_ratio.1 <= 2.0 / f.sin_alpha);
        assert!(f.min_gap > 0.0);
    }

    #[test]
    fn hypotheses_are_checked() {
        let x = Rational::new(3.into(), 10.into());
        let psi = PsiSpec::exponential(1.5);
        assert!(matches!(
            fiber_intervals(5, &base(), &x, 3, &psi, &FiberWindow::full()),
            Err(Error::InvalidCounterexampleFamily(_))
        ));
    }

    #[test]
    fn window_matches_full_fiber() {
        let x = Rational::new(3.into(), 10.into());
        let psi = PsiSpec::exponential(0.5);
        let full = fiber_intervals(5, &base(), &x, 4, &psi, &FiberWindow::full()).unwrap();
        let w = FiberWindow { start: Rational::new(1.into(), 4.into()), length: 0.25 };
        let part = fiber_intervals(5, &base(), &x, 4, &psi, &w).unwrap();
        let inside = full.intervals.iter().filter(|(a, b)| *b > 0.25 && *a < 0.5).count();
        assert_eq!(inside, part.count);
    }
}
