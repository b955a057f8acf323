//! One-dimensional formula and the critical exponent of the associated series.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::spectra::PsiSpec;

/// Sequence `a_n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum ASeq {
    /// `a_n = b^n`.
    Geometric(f64),
    /// `a_n = n^p`.
    Polynomial(f64),
    /// `a_1, ..., a_N`.
    Table(Vec<f64>),
}

impl ASeq {
    /// `ln a_n`.
    pub fn ln_at(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        match self {
            ASeq::Geometric(b) => Ok(n as f64 * libm::log(*b)),
            ASeq::Polynomial(p) => Ok(p * libm::log(n as f64)),
            ASeq::Table(v) => v
                .get(n as usize - 1)
                .map(|x| libm::log(x.abs()))
                .ok_or_else(|| Error::InvalidInput(alloc::format!("sequence has no value for n = {n}"))),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            ASeq::Geometric(b) => *b >= 1.0,
            ASeq::Polynomial(p) => *p >= 0.0,
            ASeq::Table(v) => !v.is_empty() && v.iter().all(|x| x.abs() >= 1.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("sequence must satisfy |a_n| >= 1".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Formula1d {
    pub value: f64,
    /// `limsup ln|a_n| / n` (estimated for tables).
    pub alpha: f64,
    /// Closed form for geometric `a_n` with exponential `psi`.
    pub exact: bool,
    /// Set when `alpha = 0`: the value is then only a lower bound for the dimension.
    pub lower_bound_only: bool,
}

fn tail_window(horizon: u64) -> core::ops::RangeInclusive<u64> {
    let take = libm::ceil(0.3 * horizon as f64).max(1.0) as u64;
    (horizon - take + 1).max(1)..=horizon
}

/// `limsup ln|a_n| / (ln|a_n| - ln psi(n))`, capped at 1.
pub fn formula_1d(a: &ASeq, psi: &PsiSpec, horizon: u64) -> Result<Formula1d> {
    a.validate()?;
    psi.validate()?;
    if horizon < 2 {
        return Err(Error::InvalidInput("horizon must be at least 2".into()));
    }
    if let (ASeq::Geometric(b), PsiSpec::Exponential { tau, .. }) = (a, psi) {
        let alpha = libm::log(*b);
        if alpha > 0.0 {
            return Ok(Formula1d { value: (alpha / (alpha + tau)).min(1.0), alpha, exact: true, lower_bound_only: false });
        }
    }
    let mut value = f64::NEG_INFINITY;
    for n in tail_window(horizon) {
        let la = a.ln_at(n)?;
        let den = la - psi.ln_at(n)?;
        let r = if den > 0.0 { la / den } else { 1.0 };
        value = value.max(r);
    }
    let alpha = match a {
        ASeq::Geometric(b) => libm::log(*b),
        ASeq::Polynomial(_) => 0.0,
        ASeq::Table(_) => {
            // linear growth keeps ln a_n / n stable between N/2 and N
            let hi = a.ln_at(horizon)? / horizon as f64;
            let lo = a.ln_at(horizon / 2)? / (horizon / 2) as f64;
            if hi > 0.0 && hi >= 0.9 * lo {
                hi
            } else {
                0.0
            }
        }
    };
    Ok(Formula1d { value: value.min(1.0), alpha, exact: false, lower_bound_only: alpha <= 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesClass {
    Converges,
    Diverges,
    Inconclusive,
}

/// Classifies `sum_n a_n (psi(n)/a_n)^s` from the log-terms over `[1, horizon]`.
///
/// Exponential growth or decay of the terms decides directly; otherwise the polynomial order
/// `p` of the terms is compared with `-1`.
pub fn classify_series(a: &ASeq, psi: &PsiSpec, s: f64, horizon: u64) -> Result<SeriesClass> {
    let log_term = |n: u64| -> Result<f64> {
        let la = a.ln_at(n)?;
        Ok(la + s * (psi.ln_at(n)? - la))
    };
    let half = horizon / 2;
    let (t_half, t_full) = (log_term(half)?, log_term(horizon)?);
    let rate = (t_full - t_half) / (horizon - half) as f64;
    let rate_tol = 2.0 / horizon as f64;
    let p = (t_full - t_half) / libm::log(horizon as f64 / half as f64);
    if rate > rate_tol && p > 1.0 {
        return Ok(SeriesClass::Diverges);
    }
    if rate < -rate_tol && p < -3.0 {
        return Ok(SeriesClass::Converges);
    }
    if p < -1.25 {
        Ok(SeriesClass::Converges)
    } else if p > -0.75 {
        Ok(SeriesClass::Diverges)
    } else {
        Ok(SeriesClass::Inconclusive)
    }
}

/// Log of the partial sum `sum_{n<=N} a_n (psi(n)/a_n)^s`, by log-sum-exp.
pub fn log_partial_sum(a: &ASeq, psi: &PsiSpec, s: f64, horizon: u64) -> Result<f64> {
    let mut acc = f64::NEG_INFINITY;
    for n in 1..=horizon {
        let la = a.ln_at(n)?;
        let t = la + s * (psi.ln_at(n)? - la);
        let m = acc.max(t);
        acc = m + libm::log(libm::exp(acc - m) + libm::exp(t - m));
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalCheck {
    pub formula: f64,
    pub exponent: f64,
    pub agree: bool,
    pub bracket: (f64, f64),
    pub notes: Vec<String>,
}

/// Bisection for `inf { s : sum a_n (psi(n)/a_n)^s < inf }`, compared with [`formula_1d`] within 0.02.
pub fn critical_exponent_check(a: &ASeq, psi: &PsiSpec, horizon: u64) -> Result<CriticalCheck> {
    let formula = formula_1d(a, psi, horizon)?;
    if formula.lower_bound_only {
        return Err(Error::InvalidInput("the series comparison needs alpha > 0".into()));
    }
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    if classify_series(a, psi, hi, horizon)? != SeriesClass::Converges {
        return Err(Error::Inconclusive("series does not converge at s = 2".into()));
    }
    let mut notes = Vec::new();
    let mut inconclusive: Vec<f64> = Vec::new();
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        match classify_series(a, psi, mid, horizon)? {
            SeriesClass::Converges => hi = mid,
            SeriesClass::Diverges => lo = mid,
            SeriesClass::Inconclusive => {
                inconclusive.push(mid);
                if hi - lo <= 0.01 {
                    // the undecided band sits inside an already accurate bracket
                    break;
                }
                // the critical point lies inside the undecided band; probe both sides of it
                let w = (hi - lo) / 4.0;
                let left = classify_series(a, psi, mid - w, horizon)?;
                let right = classify_series(a, psi, mid + w, horizon)?;
                match (left, right) {
                    (SeriesClass::Diverges, SeriesClass::Converges) => {
                        lo = mid - w;
                        hi = mid + w;
                    }
                    (SeriesClass::Diverges, _) => lo = mid - w,
                    (_, SeriesClass::Converges) => hi = mid + w,
                    _ => {
                        return Err(Error::Inconclusive(alloc::format!(
                            "classification undecided on [{}, {}] around s = {mid}",
                            mid - w,
                            mid + w
                        )))
                    }
                }
            }
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    if !inconclusive.is_empty() {
        notes.push(alloc::format!("{} undecided probes narrowed the bracket", inconclusive.len()));
    }
    let exponent = 0.5 * (lo + hi);
    Ok(CriticalCheck {
        formula: formula.value,
        exponent,
        agree: (exponent - formula.value).abs() <= 0.02,
        bracket: (lo, hi),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        let ln2 = core::f64::consts::LN_2;
        let f = formula_1d(&ASeq::Geometric(2.0), &PsiSpec::exponential(ln2), 100).unwrap();
        assert!((f.value - 0.5).abs() < 1e-12 && f.exact);
        let c = PsiSpec::Exponential { tau: 0.0, coeff: 0.25 };
        assert_eq!(formula_1d(&ASeq::Geometric(2.0), &c, 100).unwrap().value, 1.0);
        let f = formula_1d(&ASeq::Polynomial(1.0), &PsiSpec::power_law(1.0), 100).unwrap();
        assert!(f.lower_bound_only);
        assert!((f.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn critical_exponents() {
        let ln2 = core::f64::consts::LN_2;
        let ln3 = libm::log(3.0);
        let c = critical_exponent_check(&ASeq::Geometric(2.0), &PsiSpec::exponential(ln2), 4000).unwrap();
        assert!(c.agree && (c.exponent - 0.5).abs() < 0.02, "{c:?}");
        let c = critical_exponent_check(&ASeq::Geometric(3.0), &PsiSpec::exponential(2.0 * ln3), 4000).unwrap();
        assert!(c.agree && (c.exponent - 1.0 / 3.0).abs() < 0.02, "{c:?}");
        let half = PsiSpec::Exponential { tau: 0.0, coeff: 0.5 };
        let c = critical_exponent_check(&ASeq::Geometric(2.0), &half, 4000).unwrap();
        assert!(c.agree && (c.exponent - 1.0).abs() < 0.02, "{c:?}");
    }

    #[test]
    fn partial_sums_grow_when_divergent() {
        let ln2 = core::f64::consts::LN_2;
        let psi = PsiSpec::exponential(ln2);
        let a = ASeq::Geometric(2.0);
        let s1 = log_partial_sum(&a, &psi, 0.4, 100).unwrap();
        let s2 = log_partial_sum(&a, &psi, 0.4, 200).unwrap();
        assert!(s2 > s1 + 10.0);
        let c1 = log_partial_sum(&a, &psi, 0.6, 100).unwrap();
        let c2 = log_partial_sum(&a, &psi, 0.6, 200).unwrap();
        assert!((c2 - c1).abs() < 1e-6);
    }
}
