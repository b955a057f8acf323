//! Exhaustive successive minima over a coefficient box, used as a test oracle.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::{gram, LatticeData};
use crate::error::{Error, Result};
use crate::matrix::{integer_rank, norm_sq};
use crate::scalar::{Rational, Scalar};

/// Largest number of coefficient vectors the oracle scans.
pub const MAX_CANDIDATES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMinima<T> {
    pub squared: Vec<T>,
    pub minima: Vec<f64>,
    pub coefficients: Vec<Vec<i64>>,
}

/// All nonzero coefficient vectors in `[-b, b]^d` with first nonzero entry positive.
fn half_box(d: usize, b: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut x = alloc::vec![-b; d];
    loop {
        if let Some(first) = x.iter().find(|&&v| v != 0) {
            if *first > 0 {
                out.push(x.clone());
            }
        }
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if x[i] < b {
                x[i] += 1;
                break;
            }
            x[i] = -b;
        }
    }
}

fn greedy_independent<N: Clone + PartialOrd>(mut cands: Vec<(N, Vec<i64>)>, d: usize) -> Option<Vec<(N, Vec<i64>)>> {
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable norms"));
    let mut chosen: Vec<(N, Vec<i64>)> = Vec::with_capacity(d);
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(d);
    for (n, x) in cands {
        rows.push(x.iter().map(|&v| BigInt::from(v)).collect());
        if integer_rank(&rows) == rows.len() {
            chosen.push((n, x));
            if chosen.len() == d {
                return Some(chosen);
            }
        } else {
            rows.pop();
        }
    }
    None
}

fn check_box(d: usize, b: i64) -> Result<()> {
    if b < 1 {
        return Err(Error::InvalidInput("box bound must be positive".into()));
    }
    let total = (2 * b as u64 + 1).checked_pow(d as u32).unwrap_or(u64::MAX);
    if d > 3 || total > MAX_CANDIDATES {
        return Err(Error::InvalidInput("oracle is limited to d <= 3 and 10^6 candidates".into()));
    }
    Ok(())
}

/// Exact oracle: scans `[-b, b]^d` and certifies the box contains every vector of norm `<= m_d`.
pub fn brute_force_minima(data: &LatticeData<Rational>, b: i64) -> Result<OracleMinima<Rational>> {
    let d = data.dim();
    check_box(d, b)?;
    let vectors = data.basis_vectors();
    let g = gram(&vectors);
    // integer Gram matrix scaled by the common denominator
    let mut denom = BigInt::one();
    for i in 0..d {
        for j in 0..d {
            denom = denom.lcm(g[(i, j)].denom());
        }
    }
    let scale = Rational::from_integer(denom.clone());
    let mut gi = alloc::vec![alloc::vec![0i128; d]; d];
    for i in 0..d {
        for j in 0..d {
            let v = (g[(i, j)].clone() * scale.clone()).to_integer();
            gi[i][j] = v
                .to_i64()
                .ok_or_else(|| Error::InvalidInput("Gram entries too large for the oracle".into()))?
                as i128;
        }
    }
    let cands: Vec<(i128, Vec<i64>)> = half_box(d, b)
        .into_iter()
        .map(|x| {
            let mut s: i128 = 0;
            for i in 0..d {
                for j in 0..d {
                    s += gi[i][j] * x[i] as i128 * x[j] as i128;
                }
            }
            (s, x)
        })
        .collect();
    let chosen = greedy_independent(cands, d).ok_or(Error::InsufficientBox { needed: d })?;
    let squared: Vec<Rational> = chosen.iter().map(|(s, _)| Rational::new(BigInt::from(*s), denom.clone())).collect();
    // |x_i| <= |row_i(B^{-1})| |v|, so b^2 >= R^2 |row_i|^2 guarantees coverage
    let inv = data.basis.inverse()?;
    let r = squared[d - 1].clone();
    let bb = Rational::from_integer(BigInt::from(b * b));
    for i in 0..d {
        if norm_sq(inv.row(i)) * r.clone() > bb {
            return Err(Error::InsufficientBox { needed: d });
        }
    }
    Ok(OracleMinima {
        minima: squared.iter().map(|s| libm::sqrt(Scalar::to_f64(s))).collect(),
        squared,
        coefficients: chosen.into_iter().map(|(_, x)| x).collect(),
    })
}

/// Floating-point oracle with the same certificate (slack `1e-9`).
pub fn brute_force_minima_float(data: &LatticeData<f64>, b: i64) -> Result<OracleMinima<f64>> {
    let d = data.dim();
    check_box(d, b)?;
    let vectors = data.basis_vectors();
    let g = gram(&vectors);
    let cands: Vec<(f64, Vec<i64>)> = half_box(d, b)
        .into_iter()
        .map(|x| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += g[(i, j)] * x[i] as f64 * x[j] as f64;
                }
            }
            (s, x)
        })
        .collect();
    let chosen = greedy_independent(cands, d).ok_or(Error::InsufficientBox { needed: d })?;
    let squared: Vec<f64> = chosen.iter().map(|(s, _)| *s).collect();
    let inv = data.basis.inverse()?;
    let r = squared[d - 1] * (1.0 + 1e-9);
    for i in 0..d {
        if norm_sq(inv.row(i)) * r > (b * b) as f64 {
            return Err(Error::InsufficientBox { needed: d });
        }
    }
    Ok(OracleMinima {
        minima: squared.iter().map(|s| libm::sqrt(*s)).collect(),
        squared,
        coefficients: chosen.into_iter().map(|(_, x)| x).collect(),
    })
}
