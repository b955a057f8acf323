//! Closed-form dimension values for concrete families, written directly from eigenvalue data.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};

fn sorted_logs(moduli: &[f64]) -> Result<Vec<f64>> {
    if moduli.is_empty() {
        return Err(Error::InvalidInput("no eigenvalue moduli".into()));
    }
    if let Some(&m) = moduli.iter().find(|&&m| !(m > 1.0)) {
        return Err(Error::NotExpanding(m));
    }
    let mut l: Vec<f64> = moduli.iter().map(|m| libm::log(*m)).collect();
    l.sort_by(f64::total_cmp);
    Ok(l)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidInput("tau must be finite and nonnegative".into()));
    }
    Ok(())
}

fn gt(a: f64, b: f64) -> bool {
    a.cmp_tie(&b) == Ordering::Greater
}

fn lt(a: f64, b: f64) -> bool {
    a.cmp_tie(&b) == Ordering::Less
}

/// `min_i { i l_i/(tau+l_i) - sum_{l_j > tau+l_i} (l_j-l_i-tau)/(tau+l_i) + sum_{j>i} l_j/(tau+l_i) }`
/// with `l_i = ln |lambda_i|` ascending.
pub fn formula_diagonalizable(moduli: &[f64], tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let l = sorted_logs(moduli)?;
    let d = l.len();
    let mut best = f64::INFINITY;
    for i in 0..d {
        let den = tau + l[i];
        let mut v = (i + 1) as f64 * l[i] / den;
        for j in 0..d {
            if gt(l[j], tau + l[i]) {
                v -= (l[j] - l[i] - tau) / den;
            }
        }
        for j in i + 1..d {
            v += l[j] / den;
        }
        best = best.min(v);
    }
    Ok(best)
}

/// `min_i { sum_j l_j/(tau+l_i) - sum_{l_j < l_i} (l_j-l_i)/(tau+l_i) }`.
pub fn formula_hat(moduli: &[f64], tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let l = sorted_logs(moduli)?;
    let total: f64 = l.iter().sum();
    let mut best = f64::INFINITY;
    for i in 0..l.len() {
        let den = tau + l[i];
        let mut v = total / den;
        for j in 0..l.len() {
            if lt(l[j], l[i]) {
                v -= (l[j] - l[i]) / den;
            }
        }
        best = best.min(v);
    }
    Ok(best)
}

/// Expanding Jordan form with blocks `(lambda_j, n_j)`:
/// `s(i) = sum_{K1'} n_j + sum_{K2'} n_j l_i/(l_i+tau) + sum_{K3'} n_j l_j/(l_i+tau)`, minimized over
/// blocks, where `K1' = {l_j > l_i + tau}`, `K2' = {|lambda_j| < |lambda_i|}` and `K3'` is the rest.
pub fn formula_jordan(blocks: &[(f64, usize)], tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if blocks.is_empty() || blocks.iter().any(|b| b.1 == 0) {
        return Err(Error::InvalidInput("Jordan blocks need positive sizes".into()));
    }
    if let Some(b) = blocks.iter().find(|b| !(b.0.abs() > 1.0)) {
        return Err(Error::NotExpanding(b.0.abs()));
    }
    let l: Vec<f64> = blocks.iter().map(|b| libm::log(b.0.abs())).collect();
    let mut best = f64::INFINITY;
    for i in 0..blocks.len() {
        let den = l[i] + tau;
        let mut v = 0.0;
        for j in 0..blocks.len() {
            let nj = blocks[j].1 as f64;
            if gt(l[j], l[i] + tau) {
                v += nj;
            } else if lt(l[j], l[i]) {
                v += nj * l[i] / den;
            } else {
                v += nj * l[j] / den;
            }
        }
        best = best.min(v);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleValue {
    /// Value from the common-bound formula on the moduli of `lambda A`.
    pub value: f64,
    /// `2 l_2 / (tau + l_2)`, available when `tau < (l_2 - l_1)/2`.
    pub closed_form: Option<f64>,
    pub l: [f64; 2],
}

/// Dimension for `(lambda A)^n` with `A` a symmetric unimodular integer `2 x 2` matrix.
pub fn formula_counterexample(lambda: i64, a: &Mat<Rational>, tau: f64) -> Result<CounterexampleValue> {
    let bad = |m: &str| Error::InvalidCounterexampleFamily(m.into());
    if a.dim() != 2 || !a.is_integer() {
        return Err(bad("A must be a 2x2 integer matrix"));
    }
    if !a.is_symmetric() {
        return Err(bad("A must be symmetric"));
    }
    if !a.det().abs().is_one() {
        return Err(bad("A must have |det A| = 1"));
    }
    if lambda == 0 {
        return Err(bad("lambda must be a nonzero integer"));
    }
    let moduli = crate::linalg::eigenvalue_moduli(a)?;
    if moduli.iter().any(|m| (m - 1.0).abs() <= 1e-12) {
        return Err(bad("A has an eigenvalue of modulus one"));
    }
    let lam = (lambda as f64).abs();
    let scaled: Vec<f64> = moduli.iter().map(|m| lam * m).collect();
    if scaled.iter().any(|m| *m <= 1.0) {
        return Err(bad("lambda A is not expanding"));
    }
    let value = formula_hat(&scaled, tau)?;
    let (l1, l2) = (libm::log(scaled[0]), libm::log(scaled[1]));
    let closed_form = if tau < (l2 - l1) / 2.0 { Some(2.0 * l2 / (tau + l2)) } else { None };
    Ok(CounterexampleValue { value, closed_form, l: [l1, l2] })
}

/// Exponents `(l_1, l_2, l_3)` of the three-dimensional example with corner entry `k`.
pub fn example1_exponents(k: u64) -> [f64; 3] {
    let r5 = libm::sqrt(5.0);
    [libm::log((15.0 - 5.0 * r5) / 2.0), libm::log((15.0 + 5.0 * r5) / 2.0), libm::log(k as f64)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example1Value {
    pub value: f64,
    /// 1..=4, in order of increasing `tau`.
    pub branch: u8,
    pub l: [f64; 3],
}

/// Four-branch piecewise dimension of the block matrix `[[10,5,0],[5,5,0],[0,0,k]]`.
///
/// Branches 1 and 2 keep the `3 l_3/(tau + l_3)` term of the derivation: it is inactive when
/// `l_3 >= 2 l_2`, but can be the minimum in branch 2 for smaller `k`.
pub fn formula_example1(k: u64, tau: f64) -> Result<Example1Value> {
    check_tau(tau)?;
    let l = example1_exponents(k);
    let lambda2 = (15.0 + 5.0 * libm::sqrt(5.0)) / 2.0;
    if !((k as f64) > libm::pow(lambda2, 1.5)) {
        return Err(Error::HypothesisViolated(alloc::format!(
            "k = {k} must exceed lambda_2^(3/2) = {:.6}",
            libm::pow(lambda2, 1.5)
        )));
    }
    let [l1, l2, l3] = l;
    let a = (tau + 3.0 * l2) / (tau + l2);
    let b = (tau + 2.0 * l1 + l2) / (tau + l1);
    let c = (2.0 * l2 + l3) / (tau + l2);
    let e = 3.0 * l3 / (tau + l3);
    let f = (l1 + l2 + l3) / (tau + l1);
    let (value, branch) = if tau <= (l2 - l1) / 2.0 {
        (a.min(e), 1)
    } else if tau <= l3 - l2 {
        (b.min(a).min(e), 2)
    } else if tau <= l3 - l1 {
        (b.min(c).min(e), 3)
    } else {
        (f.min(c).min(e), 4)
    };
    Ok(Example1Value { value, branch, l })
}

/// `(hat, upper, lower)` for the same family in the range `tau < l_2 - 2 l_1`, from the minima
/// listed for that range.
pub fn example1_small_tau(k: u64, tau: f64) -> Result<[f64; 3]> {
    let upper = formula_example1(k, tau)?.value;
    let [l1, l2, l3] = example1_exponents(k);
    if !(tau < l2 - 2.0 * l1) {
        return Err(Error::InvalidInput(alloc::format!("tau must be below l_2 - 2 l_1 = {:.6}", l2 - 2.0 * l1)));
    }
    let hat = (3.0 * l3 / (tau + l3)).min((2.0 * l2 + l3) / (tau + l2)).min((l1 + l2 + l3) / (tau + l1));
    let lower =
        (3.0 * l3 / (tau + l3)).min((tau + 3.0 * l2) / (tau + l2)).min((2.0 * tau + 3.0 * l1) / (tau + l1));
    Ok([hat, upper, lower])
}

/// `s_lower` for the scaled-power family at its limit exponents: `min_i` of the lower bound with
/// `h` dropped, written out for `d = 2`.
pub fn counterexample_lower(l: [f64; 2], tau: f64) -> f64 {
    let [l1, l2] = l;
    let first = if gt(l2, tau + l1) { (2.0 * l1 + tau) / (tau + l1) } else { (l1 + l2) / (tau + l1) };
    let second = 2.0 * l2 / (tau + l2);
    first.min(second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn diagonalizable_examples() {
        let e = core::f64::consts::E;
        assert!(close(formula_diagonalizable(&[e, e * e], 1.0).unwrap(), 4.0 / 3.0, 1e-12));
        let c: f64 = 3.0;
        let v = formula_diagonalizable(&[c, c, c], 0.4).unwrap();
        assert!(close(v, 3.0 * c.ln() / (0.4 + c.ln()), 1e-12));
        assert!(close(formula_diagonalizable(&[2.0, 8.0], 0.0).unwrap(), 2.0, 1e-12));
        assert_eq!(formula_diagonalizable(&[0.5, 2.0], 1.0), Err(Error::NotExpanding(0.5)));
    }

    #[test]
    fn hat_examples() {
        let r5 = libm::sqrt(5.0);
        let m = [5.0 * (3.0 - r5) / 2.0, 5.0 * (3.0 + r5) / 2.0];
        let l2 = libm::log(m[1]);
        assert!(close(formula_hat(&m, 0.5).unwrap(), 2.0 * l2 / (0.5 + l2), 1e-12));
        assert!(close(formula_hat(&m, 0.5).unwrap(), 1.6744644966458684, 1e-12));
        let [l1, l2, l3] = example1_exponents(262);
        let m3 = [libm::exp(l1), libm::exp(l2), 262.0];
        assert!(close(formula_hat(&m3, 1.0).unwrap(), 3.0 * l3 / (1.0 + l3), 1e-12));
        assert!(close(formula_hat(&m3, 1.0).unwrap(), 2.5432639079326349, 1e-12));
        let _ = (l1, l2);
    }

    #[test]
    fn jordan_examples() {
        let ln2 = libm::log(2.0);
        assert!(close(formula_jordan(&[(2.0, 3)], 1.0).unwrap(), 3.0 * ln2 / (ln2 + 1.0), 1e-12));
        assert!(close(formula_jordan(&[(2.0, 3)], 1.0).unwrap(), 1.2281516725510763, 1e-12));
        for tau in [0.0, 0.3, 1.0, 2.5] {
            let j = formula_jordan(&[(2.0, 1), (2.0, 1)], tau).unwrap();
            assert!(close(j, formula_diagonalizable(&[2.0, 2.0], tau).unwrap(), 1e-12));
        }
        assert!(close(formula_jordan(&[(2.0, 2), (8.0, 1)], 0.0).unwrap(), 3.0, 1e-12));
    }

    #[test]
    fn counterexample_paths_agree() {
        let q = Rational::from_i64;
        let a = Mat::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(1)]]).unwrap();
        let v = formula_counterexample(5, &a, 0.5).unwrap();
        assert!(close(v.value, v.closed_form.unwrap(), 1e-12));
        assert!(close(v.value, 1.6744644966458684, 1e-12));
        let m: Vec<f64> = v.l.iter().map(|x| libm::exp(*x)).collect();
        let v2 = formula_counterexample(5, &a, 2.0).unwrap();
        assert!(close(v2.value, formula_diagonalizable(&m, 2.0).unwrap(), 1e-12));
        assert!(close(formula_counterexample(5, &a, 0.0).unwrap().value, 2.0, 1e-12));
        let not_sym = Mat::from_rows(vec![vec![q(2), q(1)], vec![q(3), q(2)]]).unwrap();
        assert!(matches!(formula_counterexample(5, &not_sym, 0.5), Err(Error::InvalidCounterexampleFamily(_))));
    }

    #[test]
    fn example1_values() {
        let v = formula_example1(262, 1.0).unwrap();
        assert!(close(v.value, 2.4400678847781768, 1e-12));
        assert_eq!(v.branch, 2);
        let [hat, upper, lower] = example1_small_tau(262, 1.0).unwrap();
        assert!(close(hat, 2.5432639079326349, 1e-12) && close(upper, 2.4400678847781768, 1e-12) && close(lower, 2.3928407161486926, 1e-12));
        assert!(close(formula_example1(262, 1e-9).unwrap().value, 3.0, 1e-6));
        let big = formula_example1(262, 1e6).unwrap();
        assert_eq!(big.branch, 4);
        assert!(big.value < 1e-4);
        assert!(matches!(formula_example1(40, 1.0), Err(Error::HypothesisViolated(_))));
    }
}
