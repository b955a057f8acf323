//! Successive minima by repeated shortest-vector search outside the span of earlier witnesses.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::hnf::{column_hnf, unimodular_inverse};
use super::lll::{gso, lll, Gso};
use super::{LatticeData, MinimaOptions, SuccessiveMinima};
use crate::error::{Error, Result};
use crate::matrix::{combine, norm_sq};
use crate::scalar::Scalar;

/// Successive minima `m_1 <= ... <= m_d` with linearly independent witnesses.
///
/// The basis is LLL-reduced, then for each `k` the shortest lattice vector outside the span of
/// the first `k` witnesses is found by Schnorr-Euchner enumeration with a shrinking radius. After
/// each witness the basis is rebuilt so its first vectors generate the primitive sublattice
/// spanned by the witnesses, which turns "outside the span" into "nonzero tail coordinates".
pub fn successive_minima<T: Scalar>(data: &LatticeData<T>, opts: &MinimaOptions) -> Result<SuccessiveMinima<T>> {
    let d = data.dim();
    if d > 6 {
        return Err(Error::InvalidInput("successive minima are supported for d <= 6".into()));
    }
    data.check_condition()?;
    let original = data.basis_vectors();
    let delta = T::from_i64(99) / T::from_i64(100);
    let mut basis = original.clone();
    let mut coeffs = super::hnf::identity(d);
    lll(&mut basis, &mut coeffs, &delta, None, opts.max_swaps)?;

    let mut squared: Vec<T> = Vec::with_capacity(d);
    let mut witness_coeffs: Vec<Vec<BigInt>> = Vec::with_capacity(d);
    let mut nodes = 0u64;
    for k in 0..d {
        let g = gso(&basis)?;
        let found = shortest_with_tail(&g, k, &mut nodes, opts.node_budget);
        let (norm, x) = match found {
            Ok(v) => v,
            Err(Error::BudgetExceeded { budget, .. }) => {
                return Err(Error::BudgetExceeded {
                    budget,
                    lower_bound: Some(squared.iter().map(|s| libm::sqrt(s.to_f64())).collect()),
                })
            }
            Err(e) => return Err(e),
        };
        let _ = norm;
        // candidates come back in current coordinates; pick by original coordinates
        let orig: Vec<Vec<BigInt>> = x.iter().map(|xi| to_original(xi, &coeffs)).collect();
        let chosen = orig.into_iter().max_by(|a, b| lex_cmp(a, b)).expect("at least one candidate");
        let w = combine(&original, &chosen);
        squared.push(norm_sq(&w));
        witness_coeffs.push(chosen);
        if k + 1 < d {
            let (_, v) = column_hnf(&witness_coeffs, d)?;
            let w_inv = unimodular_inverse(&v)?;
            basis = w_inv.iter().map(|row| combine(&original, row)).collect();
            coeffs = w_inv;
            lll(&mut basis, &mut coeffs, &delta, Some(k + 1), opts.max_swaps)?;
        }
    }
    let witnesses: Vec<Vec<T>> = witness_coeffs.iter().map(|c| combine(&original, c)).collect();
    let minima = squared.iter().map(|s| libm::sqrt(s.to_f64())).collect();
    Ok(SuccessiveMinima { squared, minima, witnesses, coefficients: witness_coeffs, nodes })
}

fn to_original(x: &[i64], coeffs: &[Vec<BigInt>]) -> Vec<BigInt> {
    let d = coeffs[0].len();
    let mut out = vec![BigInt::zero(); d];
    for (xi, row) in x.iter().zip(coeffs) {
        if *xi == 0 {
            continue;
        }
        let xb = BigInt::from(*xi);
        for (o, c) in out.iter_mut().zip(row) {
            *o += &xb * c;
        }
    }
    sign_normalize(out)
}

/// Flips the sign so the first nonzero coordinate is positive.
pub fn sign_normalize(mut v: Vec<BigInt>) -> Vec<BigInt> {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    v
}

pub fn lex_cmp(a: &[BigInt], b: &[BigInt]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

struct Search<'a, T> {
    g: &'a Gso<T>,
    k: usize,
    radius: T,
    slack: T,
    x: Vec<i64>,
    found: Vec<(T, Vec<i64>)>,
    nodes: &'a mut u64,
    budget: u64,
}

/// Every shortest vector (up to sign) whose coordinates `x_k..x_{d-1}` are not all zero.
fn shortest_with_tail<T: Scalar>(g: &Gso<T>, k: usize, nodes: &mut u64, budget: u64) -> Result<(T, Vec<Vec<i64>>)> {
    let d = g.b.len();
    // any tail basis vector is a valid candidate: |b_j|^2 = sum_i mu_ji^2 B_i
    let mut radius: Option<T> = None;
    for j in k..d {
        let mut s = g.b[j].clone();
        for i in 0..j {
            s = s + g.mu[j][i].clone() * g.mu[j][i].clone() * g.b[i].clone();
        }
        if radius.as_ref().map_or(true, |r| s < *r) {
            radius = Some(s);
        }
    }
    let slack = if T::EXACT { T::one() } else { T::one() + T::from_f64(1e-9) };
    let mut s = Search {
        g,
        k,
        radius: radius.expect("k < d"),
        slack,
        x: vec![0; d],
        found: Vec::new(),
        nodes,
        budget,
    };
    s.level(d - 1, T::zero())?;
    let best = s.found.iter().map(|(n, _)| n.clone()).fold(None, |acc: Option<T>, n| match acc {
        Some(a) if a <= n => Some(a),
        _ => Some(n),
    });
    let best = best.ok_or_else(|| Error::NumericalFailure("enumeration found no candidate".into()))?;
    let limit = best.clone() * s.slack.clone();
    let ties = s.found.into_iter().filter(|(n, _)| *n <= limit).map(|(_, x)| x).collect();
    Ok((best, ties))
}

impl<T: Scalar> Search<'_, T> {
    fn level(&mut self, i: usize, partial: T) -> Result<()> {
        let d = self.x.len();
        let mut c = T::zero();
        for j in i + 1..d {
            if self.x[j] != 0 {
                c = c - self.g.mu[j][i].clone() * T::from_i64(self.x[j]);
            }
        }
        let top_zero = self.x[i + 1..].iter().all(|&t| t == 0);
        let start = if top_zero {
            0
        } else {
            c.round_int().to_i64().ok_or_else(|| Error::NumericalFailure("enumeration coordinate overflow".into()))?
        };
        // zig-zag around the center; with a zero prefix only nonnegative values (sign symmetry)
        let up_first = T::from_i64(start) <= c;
        let mut step = 0i64;
        loop {
            let t = if top_zero {
                start + step
            } else if step == 0 {
                start
            } else {
                let m = (step + 1) / 2;
                if (step % 2 == 1) == up_first {
                    start + m
                } else {
                    start - m
                }
            };
            step += 1;
            *self.nodes += 1;
            if *self.nodes > self.budget {
                return Err(Error::BudgetExceeded { budget: self.budget, lower_bound: None });
            }
            let diff = T::from_i64(t) - c.clone();
            let rho = partial.clone() + self.g.b[i].clone() * diff.clone() * diff;
            if rho > self.radius.clone() * self.slack.clone() {
                break;
            }
            self.x[i] = t;
            if i == self.k && self.x[i..].iter().all(|&v| v == 0) {
                continue;
            }
            if i == 0 {
                if rho < self.radius {
                    self.radius = rho.clone();
                }
                self.found.push((rho, self.x.clone()));
            } else {
                self.level(i - 1, rho)?;
            }
        }
        self.x[i] = 0;
        Ok(())
    }
}
