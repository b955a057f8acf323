//! Covering counts of `W_n(psi)` by translated parallelepipeds built from a reduced lattice basis.
//!
//! The tile `P_{n,k}` is the cube of side `r_{n,k} = e^{-n(tau_n + l_{n,k})}` spanned by the unit
//! directions of the reduced basis `v_1..v_d` of `Lambda_n = A_n^{-1} Z^d`. The constructive cover
//! takes the grid tiles meeting one ellipsoid `A_n^{-1} B(0, psi(n))` and a greedy set of lattice
//! translates `z'` such that every preimage lies in some `z' + (P_{n,k} ∩ Lambda_n)`; each pair gives
//! one doubled tile, so the cover size is the product of the two counts.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::ToPrimitive;

use crate::dimension::index_sets_of;
use crate::error::{Error, Result};
use crate::lattice::{reduced_basis, successive_minima, LatticeData, MinimaOptions};
use crate::matrix::{norm_sq, Mat};
use crate::scalar::{Rational, Scalar};
use crate::spectra::{generate_matrix, singular_exponents, DiagonalSpec, FamilyKind, Matrix, MatrixFamily, PsiSpec};

use super::preimages::{enumerate_preimages, PREIMAGE_BUDGET};

/// Cap on grid tiles examined around one ellipsoid.
pub const TILE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringCount {
    pub n: u64,
    /// 0-based pivot `k`.
    pub pivot: usize,
    pub tau_n: f64,
    pub l: Vec<f64>,
    /// `ln m_i(Lambda_n)`, ascending.
    pub ln_minima: Vec<f64>,
    pub k2: Vec<usize>,
    pub gamma: Vec<usize>,
    /// `ln N_n`.
    pub ln_formula: f64,
    /// Tiles of the `r_{n,k}` grid meeting one ellipsoid.
    pub tiles: u64,
    /// `#(P_{n,k} ∩ Lambda_n)`.
    pub lattice_points: u64,
    /// Greedy translates needed to absorb `F_n`.
    pub translates: u128,
    /// `tiles * translates`.
    pub constructive: f64,
    /// `constructive / N_n`.
    pub ratio: f64,
}

impl CoveringCount {
    pub fn formula(&self) -> f64 {
        libm::exp(self.ln_formula)
    }
}

/// `ln N_n = sum_{K2(k)} n(l_k - l_i) + sum_i n l_i + sum_{Gamma(k)} (ln m_i + n(tau_n + l_k))`.
pub fn covering_formula_ln(n: u64, tau_n: f64, l: &[f64], ln_minima: &[f64], k: usize) -> Result<f64> {
    if k >= l.len() || ln_minima.len() != l.len() {
        return Err(Error::InvalidInput("pivot or minima length out of range".into()));
    }
    let nf = n as f64;
    let h: Vec<f64> = ln_minima.iter().map(|m| -m / nf).collect();
    let sets = index_sets_of(&tau_n, l, Some(&h), k);
    let mut ln = l.iter().map(|x| nf * x).sum::<f64>();
    for &i in &sets.k2 {
        ln += nf * (l[k] - l[i]);
    }
    for &i in sets.gamma.as_deref().unwrap_or(&[]) {
        ln += ln_minima[i] + nf * (tau_n + l[k]);
    }
    Ok(ln)
}

/// Formula value `N_n` and the constructive cover size at level `n` and 0-based pivot `k`.
pub fn covering_count(family: &MatrixFamily, psi: &PsiSpec, n: u64, k: usize) -> Result<CoveringCount> {
    let d = family.d;
    if d == 0 || d > 3 {
        return Err(Error::InvalidInput("covering counts support d <= 3".into()));
    }
    if n == 0 || k >= d {
        return Err(Error::InvalidInput("need n >= 1 and a pivot below d".into()));
    }
    let tau_n = psi.tau_n(n)?;
    let l = singular_exponents(family, n)?;
    let a = generate_matrix(family, n)?;
    let (basis, ln_minima) = reduced_lattice(&a)?;
    let nf = n as f64;
    let h: Vec<f64> = ln_minima.iter().map(|m| -m / nf).collect();
    let sets = index_sets_of(&tau_n, &l, Some(&h), k);
    let ln_formula = covering_formula_ln(n, tau_n, &l, &ln_minima, k)?;
    let ln_r = -nf * (tau_n + l[k]);

    let lengths: Vec<f64> = basis.iter().map(|v| libm::sqrt(norm_sq(v))).collect();
    let units: Vec<Vec<f64>> = basis.iter().zip(&lengths).map(|(v, len)| v.iter().map(|x| x / len).collect()).collect();
    let tiles = ellipsoid_tiles(&a.to_f64(), &units, psi.ln_at(n)?, ln_r)?;

    // lattice points of the tile: c_j |v_j| in [0, r] for integer c_j
    let steps: Vec<u64> = lengths.iter().map(|len| libm::floor(libm::exp(ln_r - libm::log(*len)) * (1.0 + 1e-12)) as u64).collect();
    let lattice_points = steps.iter().map(|s| s + 1).product::<u64>();
    let translates = if lattice_points == 1 {
        preimage_total(family, n, &a)?
    } else {
        greedy_translates(family, n, &basis, &steps)?
    };
    let constructive = tiles as f64 * translates as f64;
    let ratio = libm::exp(libm::log(tiles as f64) + libm::log(translates as f64) - ln_formula);
    Ok(CoveringCount {
        n,
        pivot: k,
        tau_n,
        l,
        ln_minima,
        k2: sets.k2,
        gamma: sets.gamma.unwrap_or_default(),
        ln_formula,
        tiles,
        lattice_points,
        translates,
        constructive,
        ratio,
    })
}

/// Reduced basis of `A_n^{-1} Z^d` as floats, with `ln` of the successive minima.
fn reduced_lattice(a: &Matrix) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let opts = MinimaOptions::default();
    match a {
        Matrix::Exact(m) => {
            let data = LatticeData::from_matrix(m)?;
            let mins = successive_minima(&data, &opts)?;
            let red = reduced_basis(&data, &mins)?;
            let ln = mins.squared.iter().map(|s| 0.5 * s.ln_abs()).collect();
            Ok((red.vectors.iter().map(|v| v.iter().map(Scalar::to_f64).collect()).collect(), ln))
        }
        Matrix::Float(m) => {
            let data = LatticeData::from_matrix(m)?;
            let mins = successive_minima(&data, &opts)?;
            let red = reduced_basis(&data, &mins)?;
            let ln = mins.squared.iter().map(|s| 0.5 * libm::log(*s)).collect();
            Ok((red.vectors, ln))
        }
    }
}

/// Number of cells `[i, i+1]^d` (in units of `r` along `units`) meeting `{p : |A p| < psi}`.
fn ellipsoid_tiles(a: &Mat<f64>, units: &[Vec<f64>], ln_psi: f64, ln_r: f64) -> Result<u64> {
    let d = a.dim();
    let u = Mat::from_cols(units);
    let au = a.mul(&u);
    // quadratic form in tile coordinates t, with p = r U t
    let g = au.transpose().mul(&au).scale(&libm::exp(2.0 * (ln_r - ln_psi)));
    let ginv = g.inverse()?;
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    let mut candidates = 1u64;
    for j in 0..d {
        let b = libm::sqrt(ginv[(j, j)].max(0.0));
        lo[j] = libm::floor(-b) as i64;
        hi[j] = libm::ceil(b) as i64 - 1;
        candidates = candidates.saturating_mul((hi[j] - lo[j] + 1) as u64);
    }
    if candidates > TILE_BUDGET {
        return Err(Error::BudgetExceeded { budget: TILE_BUDGET, lower_bound: None });
    }
    let mut idx = lo.clone();
    let mut count = 0u64;
    loop {
        let bl: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
        let bh: Vec<f64> = idx.iter().map(|&i| (i + 1) as f64).collect();
        if box_minimum(&g, &bl, &bh) < 1.0 {
            count += 1;
        }
        let mut j = 0;
        loop {
            if j == d {
                return Ok(count);
            }
            if idx[j] < hi[j] {
                idx[j] += 1;
                break;
            }
            idx[j] = lo[j];
            j += 1;
        }
    }
}

/// `min t^T G t` over the box `[lo, hi]` for positive definite `G`, `d <= 3`.
///
/// Every coordinate is either free or pinned to a face; the optimum is the best feasible
/// stationary point over the `3^d` patterns.
fn box_minimum(g: &Mat<f64>, lo: &[f64], hi: &[f64]) -> f64 {
    let d = lo.len();
    if (0..d).all(|j| lo[j] <= 0.0 && 0.0 <= hi[j]) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let patterns = 3usize.pow(d as u32);
    for mut code in 0..patterns {
        let mut t = vec![0.0; d];
        let mut free = Vec::new();
        for j in 0..d {
            match code % 3 {
                0 => free.push(j),
                1 => t[j] = lo[j],
                _ => t[j] = hi[j],
            }
            code /= 3;
        }
        if !free.is_empty() {
            // G_FF t_F = -G_FB t_B
            let rows: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| g[(i, j)]).collect()).collect();
            let rhs: Vec<f64> = free
                .iter()
                .map(|&i| -(0..d).filter(|j| !free.contains(j)).map(|j| g[(i, j)] * t[j]).sum::<f64>())
                .collect();
            let Some(sol) = Mat::from_rows(rows).ok().and_then(|m| m.inverse().ok()).map(|m| m.mul_vec(&rhs)) else {
                continue;
            };
            let slack = 1e-12;
            if free.iter().zip(&sol).any(|(&j, &s)| s < lo[j] - slack || s > hi[j] + slack) {
                continue;
            }
            for (&j, &s) in free.iter().zip(&sol) {
                t[j] = s.clamp(lo[j], hi[j]);
            }
        }
        let gt = g.mul_vec(&t);
        let v: f64 = t.iter().zip(&gt).map(|(a, b)| a * b).sum();
        best = best.min(v);
    }
    best
}

/// `#F_n(0)`: the product of `ceil |a_jj|` for diagonal families, `|det A_n|` for integer ones,
/// enumeration otherwise.
fn preimage_total(family: &MatrixFamily, n: u64, a: &Matrix) -> Result<u128> {
    if let FamilyKind::Diagonal(spec) = &family.kind {
        let counts: Vec<u128> = match (spec, a) {
            (DiagonalSpec::Base(_), Matrix::Exact(m)) => (0..m.dim())
                .map(|j| {
                    let e: Rational = m[(j, j)].abs_val();
                    e.ceil().to_integer().to_u128()
                })
                .collect::<Option<_>>()
                .ok_or_else(|| Error::BudgetExceeded { budget: u64::MAX, lower_bound: None })?,
            _ => {
                let m = a.to_f64();
                (0..m.dim()).map(|j| libm::ceil(m[(j, j)].abs()) as u128).collect()
            }
        };
        return Ok(counts.iter().product());
    }
    if let Some(m) = a.as_exact() {
        if m.is_integer() {
            return m.det().abs_val().to_integer().to_u128().ok_or(Error::BudgetExceeded { budget: u64::MAX, lower_bound: None });
        }
    }
    Ok(enumerate_preimages(family, n, &vec![0.0; family.d], PREIMAGE_BUDGET)?.len() as u128)
}

/// Lexicographic greedy: sweep `F_n` in basis coordinates, opening a translate at each uncovered
/// point and absorbing every point in its lattice box `c + [0, steps]`.
fn greedy_translates(family: &MatrixFamily, n: u64, basis: &[Vec<f64>], steps: &[u64]) -> Result<u128> {
    let d = family.d;
    let set = enumerate_preimages(family, n, &vec![0.0; d], PREIMAGE_BUDGET)?;
    let v = Mat::from_cols(basis);
    let vinv = v.inverse()?;
    let scale = basis.iter().map(|b| libm::sqrt(norm_sq(b))).fold(f64::INFINITY, f64::min);
    let mut keys: Vec<[i64; 3]> = Vec::with_capacity(set.len());
    for z in &set.points {
        let c = vinv.mul_vec(z);
        let mut key = [0i64; 3];
        for j in 0..d {
            key[j] = libm::round(c[j]) as i64;
        }
        let back = v.mul_vec(&key[..d].iter().map(|&x| x as f64).collect::<Vec<_>>());
        let err = back.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        if !(libm::sqrt(err) <= 1e-6 * scale) {
            return Err(Error::NumericalFailure("preimage is not a lattice point of the reduced basis".into()));
        }
        keys.push(key);
    }
    keys.sort_unstable();
    let mut covered = vec![false; keys.len()];
    let mut offsets: Vec<[i64; 3]> = vec![[0; 3]];
    for j in 0..d {
        let mut next = Vec::with_capacity(offsets.len() * (steps[j] as usize + 1));
        for o in &offsets {
            for s in 0..=steps[j] as i64 {
                let mut p = *o;
                p[j] = s;
                next.push(p);
            }
        }
        offsets = next;
    }
    let mut picks = 0u128;
    for i in 0..keys.len() {
        if covered[i] {
            continue;
        }
        picks += 1;
        let base = keys[i];
        for o in &offsets {
            let target = [base[0] + o[0], base[1] + o[1], base[2] + o[2]];
            if let Ok(pos) = keys.binary_search(&target) {
                covered[pos] = true;
            }
        }
    }
    Ok(picks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_rates() -> MatrixFamily {
        MatrixFamily::new(FamilyKind::Diagonal(DiagonalSpec::Rates(vec![1.0, 2.0])), true).unwrap()
    }

    fn scaled_power() -> MatrixFamily {
        let q = Rational::from_i64;
        let a = Mat::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(1)]]).unwrap();
        MatrixFamily::new(FamilyKind::ScaledPower { lambda: 5, base: a }, true).unwrap()
    }

    #[test]
    fn diagonal_formula_and_cover() {
        let c = covering_count(&diag_rates(), &PsiSpec::exponential(1.0), 5, 1).unwrap();
        assert!((c.ln_formula - 20.0).abs() < 1e-9);
        assert!(c.gamma.is_empty());
        assert_eq!(c.lattice_points, 1);
        assert_eq!(c.translates, 149 * 22027);
        assert!(c.ratio >= 1.0 && c.ratio <= 8.0, "ratio {}", c.ratio);
    }

    #[test]
    fn scaled_power_top_pivot_has_empty_gamma() {
        let f = scaled_power();
        let psi = PsiSpec::exponential(0.5);
        for n in 1..4 {
            let c = covering_count(&f, &psi, n, 1).unwrap();
            assert!(c.gamma.is_empty());
            // reduces to the numerator 2 l_2 of the hat bound
            assert!((c.ln_formula - 2.0 * n as f64 * c.l[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn scaled_power_bottom_pivot_has_full_gamma() {
        let f = scaled_power();
        let psi = PsiSpec::exponential(0.5);
        for n in 2..5 {
            let c = covering_count(&f, &psi, n, 0).unwrap();
            assert_eq!(c.gamma, vec![0, 1]);
            assert!((c.ln_formula - 2.0 * n as f64 * (0.5 + c.l[0])).abs() < 1e-9);
            assert!(c.lattice_points > 1);
            assert!(c.ratio < 50.0, "n={n} ratio {}", c.ratio);
        }
    }

    #[test]
    fn box_minimum_matches_sampling() {
        let g = Mat::from_rows(vec![vec![2.0, 0.7], vec![0.7, 1.0]]).unwrap();
        for (lo, hi) in [([1.0, -2.0], [2.0, -1.0]), ([-0.5, 0.5], [0.5, 1.5]), ([-3.0, 2.0], [-2.0, 3.0])] {
            let exact = box_minimum(&g, &lo, &hi);
            let mut sampled = f64::INFINITY;
            for a in 0..=200 {
                for b in 0..=200 {
                    let t = [lo[0] + (hi[0] - lo[0]) * a as f64 / 200.0, lo[1] + (hi[1] - lo[1]) * b as f64 / 200.0];
                    let v = 2.0 * t[0] * t[0] + 1.4 * t[0] * t[1] + t[1] * t[1];
                    sampled = sampled.min(v);
                }
            }
            assert!(exact <= sampled + 1e-12 && sampled - exact < 1e-3, "{exact} vs {sampled}");
        }
    }
}
