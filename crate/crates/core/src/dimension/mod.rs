//! Per-`n` dimension bounds, their limsup aggregates, dimensional numbers and closed forms.

pub mod dimnumber;
pub mod formulas;
pub mod series;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::lattice::{analytic_h, h_profile, MinimaOptions};
use crate::scalar::Scalar;
use crate::spectra::{
    analytic_exponents, lower_order_at_infinity, spectral_profile, MatrixFamily, PsiSpec, SpectralProfile,
};

/// Smallest admissible `tau_n + l_{n,i}`.
pub const DENOMINATOR_GUARD: f64 = 1e-9;

/// `K1 = {j : l_j > tau + l_i}`, `K2 = {j : l_j < l_i}`, `Gamma = {j : h_j >= tau + l_i}` (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub pivot: usize,
    pub k1: Vec<usize>,
    pub k2: Vec<usize>,
    pub gamma: Option<Vec<usize>>,
}

pub fn index_sets_of<T: Scalar>(tau: &T, l: &[T], h: Option<&[T]>, i: usize) -> IndexSets {
    let thr = tau.clone() + l[i].clone();
    let k1 = (0..l.len()).filter(|&j| l[j].cmp_tie(&thr) == Ordering::Greater).collect();
    let k2 = (0..l.len()).filter(|&j| l[j].cmp_tie(&l[i]) == Ordering::Less).collect();
    let gamma = h.map(|h| (0..h.len()).filter(|&j| h[j].cmp_tie(&thr) != Ordering::Less).collect());
    IndexSets { pivot: i, k1, k2, gamma }
}

pub fn index_sets(profile: &SpectralProfile, i: usize, with_gamma: bool) -> Result<IndexSets> {
    if i >= profile.l.len() {
        return Err(Error::InvalidInput("pivot index out of range".into()));
    }
    let h = match (&profile.h, with_gamma) {
        (Some(h), true) => Some(h.as_slice()),
        (None, true) => return Err(Error::MissingHProfile),
        _ => None,
    };
    Ok(index_sets_of(&profile.tau_n, &profile.l, h, i))
}

fn denominator<T: Scalar>(tau: &T, l: &[T], i: usize) -> Result<T> {
    let den = tau.clone() + l[i].clone();
    if !(den.to_f64() > DENOMINATOR_GUARD) {
        return Err(Error::NonExpandingDenominator(den.to_f64()));
    }
    Ok(den)
}

/// `sum_j l_j - sum_{K2}(l_j - l_i)`, shared by all three bounds.
fn common_part<T: Scalar>(l: &[T], i: usize, sets: &IndexSets) -> T {
    let mut s = T::zero();
    for x in l {
        s = s + x.clone();
    }
    for &j in &sets.k2 {
        s = s - (l[j].clone() - l[i].clone());
    }
    s
}

/// Lower bound at pivot `i`: `[sum l - sum_{K2}(l_j - l_i) + sum_{K1}(tau + l_i - l_j)] / (tau + l_i)`.
pub fn s_lower_of<T: Scalar>(tau: &T, l: &[T], i: usize) -> Result<T> {
    let den = denominator(tau, l, i)?;
    let sets = index_sets_of(tau, l, None, i);
    let mut num = common_part(l, i, &sets);
    for &j in &sets.k1 {
        num = num + (den.clone() - l[j].clone());
    }
    Ok(num / den)
}

/// Upper bound at pivot `i`: as the lower bound with `Gamma` and `h_j` in place of `K1` and `l_j`.
pub fn s_upper_of<T: Scalar>(tau: &T, l: &[T], h: &[T], i: usize) -> Result<T> {
    let den = denominator(tau, l, i)?;
    let sets = index_sets_of(tau, l, Some(h), i);
    let mut num = common_part(l, i, &sets);
    for &j in sets.gamma.as_ref().expect("h given") {
        num = num + (den.clone() - h[j].clone());
    }
    Ok(num / den)
}

/// Common bound at pivot `i`: `[sum l - sum_{K2}(l_j - l_i)] / (tau + l_i)`.
pub fn s_hat_of<T: Scalar>(tau: &T, l: &[T], i: usize) -> Result<T> {
    let den = denominator(tau, l, i)?;
    let sets = index_sets_of(tau, l, None, i);
    Ok(common_part(l, i, &sets) / den)
}

pub fn s_lower_n(profile: &SpectralProfile, i: usize) -> Result<f64> {
    s_lower_of(&profile.tau_n, &profile.l, i)
}

pub fn s_upper_n(profile: &SpectralProfile, i: usize) -> Result<f64> {
    let h = profile.h.as_ref().ok_or(Error::MissingHProfile)?;
    s_upper_of(&profile.tau_n, &profile.l, h, i)
}

pub fn s_hat_n(profile: &SpectralProfile, i: usize) -> Result<f64> {
    s_hat_of(&profile.tau_n, &profile.l, i)
}

/// Minimum over pivots with the first index attaining it.
pub fn min_over_pivots<T: Scalar>(d: usize, f: impl Fn(usize) -> Result<T>) -> Result<(T, usize)> {
    let mut best: Option<(T, usize)> = None;
    for i in 0..d {
        let v = f(i)?;
        match &best {
            Some((b, _)) if *b <= v => {}
            _ => best = Some((v, i)),
        }
    }
    best.ok_or_else(|| Error::InvalidInput("empty profile".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsMode {
    Numeric,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `tau` exceeds the spread `l_d - l_1`, so all three bounds agree.
    Coincide,
    /// Diagonal family: lower and upper bounds agree.
    Diagonal,
    /// Only the interval `[lower, upper]` is known.
    Interval,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Coincide => "coincide",
            Regime::Diagonal => "diagonal",
            Regime::Interval => "interval",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsOptions {
    pub mode: BoundsMode,
    /// Fraction of `n_range` (rounded up) used for the limsup estimate.
    pub tail_fraction: f64,
    pub minima: MinimaOptions,
    /// Horizon for the lower order of tabulated `psi` in analytic mode.
    pub horizon: u64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions { mode: BoundsMode::Numeric, tail_fraction: 0.3, minima: MinimaOptions::default(), horizon: 1000 }
    }
}

/// Minimum over pivots of each bound at one `n`, with 0-based argmins.
#[derive(Debug, Clone, PartialEq)]
pub struct PerNRow {
    pub n: u64,
    pub tau_n: f64,
    pub lower: (f64, usize),
    pub upper: (f64, usize),
    pub hat: (f64, usize),
    pub l: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub rows: Vec<PerNRow>,
    pub s_lower: f64,
    pub s_upper: f64,
    pub s_hat: f64,
    pub regime: Regime,
    /// First `n` of the tail window (numeric mode).
    pub tail_from: Option<u64>,
    /// `max - min` of each per-`n` minimum over the tail window.
    pub oscillation: [f64; 3],
    pub notes: Vec<String>,
}

/// Per-`n` minima of the three bounds for a profile with `h` set.
pub fn per_n_row(profile: &SpectralProfile) -> Result<PerNRow> {
    let d = profile.l.len();
    let h = profile.h.as_ref().ok_or(Error::MissingHProfile)?;
    let lower = min_over_pivots(d, |i| s_lower_n(profile, i))?;
    let upper = min_over_pivots(d, |i| s_upper_n(profile, i))?;
    let hat = min_over_pivots(d, |i| s_hat_n(profile, i))?;
    Ok(PerNRow { n: profile.n, tau_n: profile.tau_n, lower, upper, hat, l: profile.l.clone(), h: h.clone() })
}

fn spread_exceeded(tau: f64, l: &[f64]) -> bool {
    let spread = l[l.len() - 1] - l[0];
    tau.cmp_tie(&spread) == Ordering::Greater
}

pub fn dimension_bounds(
    family: &MatrixFamily,
    psi: &PsiSpec,
    n_range: core::ops::RangeInclusive<u64>,
    opts: &BoundsOptions,
) -> Result<BoundsReport> {
    psi.validate()?;
    let diagonal = family.is_diagonal();
    let mut notes = Vec::new();
    match opts.mode {
        BoundsMode::Analytic => {
            let l = analytic_exponents(family)?;
            let h = analytic_h(family)?;
            let tau = lower_order_at_infinity(psi, opts.horizon)?.tau;
            let d = l.len();
            let lower = min_over_pivots(d, |i| s_lower_of(&tau, &l, i))?.0;
            let mut upper = min_over_pivots(d, |i| s_upper_of(&tau, &l, &h, i))?.0;
            let hat = min_over_pivots(d, |i| s_hat_of(&tau, &l, i))?.0;
            if diagonal {
                upper = lower;
            }
            let regime = if spread_exceeded(tau, &l) {
                Regime::Coincide
            } else if diagonal {
                Regime::Diagonal
            } else {
                Regime::Interval
            };
            Ok(BoundsReport {
                rows: Vec::new(),
                s_lower: lower,
                s_upper: upper,
                s_hat: hat,
                regime,
                tail_from: None,
                oscillation: [0.0; 3],
                notes,
            })
        }
        BoundsMode::Numeric => {
            let ns: Vec<u64> = n_range.collect();
            if ns.is_empty() {
                return Err(Error::InvalidInput("n range is empty".into()));
            }
            let mut rows = Vec::with_capacity(ns.len());
            for &n in &ns {
                let h = h_profile(family, n, &opts.minima)?;
                let profile = spectral_profile(family, psi, n)?.with_h(h);
                rows.push(per_n_row(&profile)?);
            }
            let take = libm::ceil(opts.tail_fraction * ns.len() as f64).max(1.0) as usize;
            let tail = &rows[rows.len() - take.min(rows.len())..];
            let agg = |f: &dyn Fn(&PerNRow) -> f64| {
                let hi = tail.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
                let lo = tail.iter().map(f).fold(f64::INFINITY, f64::min);
                (hi, hi - lo)
            };
            let (lower, osc_l) = agg(&|r| r.lower.0);
            let (mut upper, osc_u) = agg(&|r| r.upper.0);
            let (hat, osc_h) = agg(&|r| r.hat.0);
            if diagonal {
                upper = lower;
            }
            if tail.iter().any(|r| r.l[0] <= 0.0) {
                notes.push(String::from("smallest exponent is not positive in the tail window"));
            }
            let coincide = tail.iter().all(|r| spread_exceeded(r.tau_n, &r.l));
            let regime = if coincide {
                Regime::Coincide
            } else if diagonal {
                Regime::Diagonal
            } else {
                Regime::Interval
            };
            Ok(BoundsReport {
                tail_from: Some(tail[0].n),
                rows,
                s_lower: lower,
                s_upper: upper,
                s_hat: hat,
                regime,
                oscillation: [osc_l, osc_u, osc_h],
                notes,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::scalar::Rational;

    fn profile(tau: f64, l: &[f64], h: Option<&[f64]>) -> SpectralProfile {
        SpectralProfile { n: 1, tau_n: tau, l: l.to_vec(), h: h.map(|h| h.to_vec()) }
    }

    #[test]
    fn index_set_examples() {
        let p = profile(1.0, &[1.0, 2.0], Some(&[2.0, 1.0]));
        let s = index_sets(&p, 1, true).unwrap();
        assert!(s.k1.is_empty());
        assert_eq!(s.k2, vec![0]);
        assert_eq!(s.gamma, Some(vec![]));
        let p = profile(0.5, &[1.0, 2.0], Some(&[2.0, 1.0]));
        let s = index_sets(&p, 0, true).unwrap();
        assert_eq!(s.k1, vec![1]);
        assert!(s.k2.is_empty());
        assert_eq!(s.gamma, Some(vec![0]));
        let p = profile(0.7, &[1.5, 1.5, 1.5], None);
        let s = index_sets(&p, 2, false).unwrap();
        assert!(s.k1.is_empty() && s.k2.is_empty());
        assert_eq!(index_sets(&p, 0, true), Err(Error::MissingHProfile));
    }

    #[test]
    fn diagonal_values() {
        let p = profile(1.0, &[1.0, 2.0], Some(&[2.0, 1.0]));
        for f in [s_lower_n, s_upper_n, s_hat_n] {
            assert!((f(&p, 1).unwrap() - 4.0 / 3.0).abs() < 1e-15);
            assert!((f(&p, 0).unwrap() - 1.5).abs() < 1e-15);
        }
        let q = |v: i64| Rational::from_i64(v);
        let (l, h) = (vec![q(1), q(2)], vec![q(2), q(1)]);
        assert_eq!(s_lower_of(&q(1), &l, 1).unwrap(), q(4) / q(3));
        assert_eq!(s_upper_of(&q(1), &l, &h, 1).unwrap(), q(4) / q(3));
    }

    #[test]
    fn scaled_power_values() {
        let r5 = libm::sqrt(5.0);
        let (l1, l2) = (libm::log(5.0 * (3.0 - r5) / 2.0), libm::log(5.0 * (3.0 + r5) / 2.0));
        let ln5 = libm::log(5.0);
        let p = profile(0.5, &[l1, l2], Some(&[ln5, ln5]));
        let (lo, _) = min_over_pivots(2, |i| s_lower_n(&p, i)).unwrap();
        let (up, _) = min_over_pivots(2, |i| s_upper_n(&p, i)).unwrap();
        let (hat, _) = min_over_pivots(2, |i| s_hat_n(&p, i)).unwrap();
        assert!((lo - 1.5640856295972252).abs() < 1e-12);
        assert!((up - 1.6744644966458684).abs() < 1e-12);
        assert!((up - hat).abs() < 1e-12);
        assert!((up - 2.0 * l2 / (0.5 + l2)).abs() < 1e-12);
    }

    #[test]
    fn equal_exponents() {
        let p = profile(0.3, &[2.0, 2.0, 2.0], Some(&[2.0, 2.0, 2.0]));
        for i in 0..3 {
            let expect = 3.0 * 2.0 / 2.3;
            assert!((s_lower_n(&p, i).unwrap() - expect).abs() < 1e-12);
            assert!((s_upper_n(&p, i).unwrap() - expect).abs() < 1e-12);
            assert!((s_hat_n(&p, i).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn denominator_guard() {
        let p = profile(0.0, &[-0.5, 1.0], None);
        assert!(matches!(s_lower_n(&p, 0), Err(Error::NonExpandingDenominator(_))));
    }
}
