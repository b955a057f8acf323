//! Box-counting estimates for truncated limsup sets in dimension 1 and 2.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::spectra::{generate_matrix, MatrixFamily, PsiSpec};

use super::least_squares;
use super::preimages::enumerate_preimages;

/// Cap on ellipse-column evaluations per level.
pub const CELL_BUDGET: u64 = 3_000_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountRow {
    pub n: u64,
    pub depth: u32,
    pub epsilon: f64,
    pub count: u64,
    /// Smallest semi-axis `psi(n) / sigma_max(A_n)` of the level-`n` ellipsoids.
    pub radius: f64,
    pub saturated: bool,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountEstimate {
    pub rows: Vec<BoxCountRow>,
    pub slope: f64,
    pub residual: f64,
    pub truncation: (u64, u64),
}

impl BoxCountEstimate {
    pub fn depths(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.depth).collect()
    }
}

/// Dyadic cells of depth `depth` meeting `W_n(psi)` (open ellipsoids around `F_n(y)`), `d <= 2`.
pub fn count_cells(family: &MatrixFamily, psi: &PsiSpec, y: &[f64], n: u64, depth: u32) -> Result<u64> {
    let d = family.d;
    if d == 0 || d > 2 {
        return Err(Error::InvalidInput("box counting supports d = 1 or 2".into()));
    }
    if depth > 30 {
        return Err(Error::InvalidInput("depth must be at most 30".into()));
    }
    let a = generate_matrix(family, n)?.to_f64();
    let psi_n = psi.at(n)?;
    let set = enumerate_preimages(family, n, y, 10_000_000)?;
    let side = (1u64 << depth) as f64;
    let cells = 1u64 << depth;
    if d == 1 {
        let r = psi_n / a[(0, 0)].abs();
        if r >= 0.5 {
            return Ok(cells);
        }
        let mut iv: Vec<(i64, i64)> = Vec::with_capacity(set.len());
        for z in &set.points {
            push_wrapped(&mut iv, cell_range(z[0] - r, z[0] + r, side), cells as i64);
        }
        return Ok(merged_length(&mut iv));
    }
    // 2-D: per-column y-extent of each ellipse {p : |A_n (p - c)| < psi}
    let g = a.transpose().mul(&a).scale(&(1.0 / (psi_n * psi_n)));
    let ginv = g.inverse()?;
    let det_g = g.det();
    let x_half = libm::sqrt(ginv[(0, 0)]);
    let y_half = libm::sqrt(ginv[(1, 1)]);
    if x_half >= 0.5 && y_half >= 0.5 {
        return Ok(cells * cells);
    }
    let dx_top = ginv[(0, 1)] / y_half;
    let upper = |dx: f64| (-g[(0, 1)] * dx + libm::sqrt((g[(1, 1)] - det_g * dx * dx).max(0.0))) / g[(1, 1)];
    let lower = |dx: f64| (-g[(0, 1)] * dx - libm::sqrt((g[(1, 1)] - det_g * dx * dx).max(0.0))) / g[(1, 1)];
    let cols_per = (2.0 * x_half * side) as u64 + 2;
    if cols_per.saturating_mul(set.len() as u64) > CELL_BUDGET {
        return Err(Error::BudgetExceeded { budget: CELL_BUDGET, lower_bound: None });
    }
    // centres sorted by x, with copies shifted by -1 and +1 for wrap-around in x
    let mut centres: Vec<(f64, f64)> = Vec::with_capacity(set.len() * 3);
    for c in &set.points {
        for shift in [-1.0, 0.0, 1.0] {
            let x = c[0] + shift;
            if x + x_half > 0.0 && x - x_half < 1.0 {
                centres.push((x, c[1]));
            }
        }
    }
    centres.sort_by(|p, q| p.0.total_cmp(&q.0));
    let words = (cells as usize).div_ceil(64);
    let block = BLOCK_COLUMNS.min(cells as usize);
    let mut bits = vec![0u64; block * words];
    let mut total = 0u64;
    let mut first = 0usize;
    for c0 in (0..cells as usize).step_by(block) {
        let c1 = (c0 + block).min(cells as usize);
        let (x0, x1) = (c0 as f64 / side, c1 as f64 / side);
        while first < centres.len() && centres[first].0 + x_half <= x0 {
            first += 1;
        }
        for &(cx, cy) in centres[first..].iter().take_while(|c| c.0 - x_half < x1) {
            let (k0, k1) = cell_range(cx - x_half, cx + x_half, side);
            for col in k0.max(c0 as i64)..=k1.min(c1 as i64 - 1) {
                let a0 = (col as f64 / side - cx).max(-x_half);
                let b0 = ((col + 1) as f64 / side - cx).min(x_half);
                if a0 >= b0 {
                    continue;
                }
                let hi = upper(dx_top.clamp(a0, b0));
                let lo = lower((-dx_top).clamp(a0, b0));
                let (parts, k) = wrapped(cell_range(cy + lo, cy + hi, side), cells as i64);
                let row_bits = &mut bits[(col as usize - c0) * words..(col as usize - c0 + 1) * words];
                for &(r0, r1) in &parts[..k] {
                    set_range(row_bits, r0 as usize, r1 as usize);
                }
            }
        }
        for w in bits.iter_mut() {
            total += w.count_ones() as u64;
            *w = 0;
        }
    }
    Ok(total)
}

/// Columns processed together by the 2-D counter.
const BLOCK_COLUMNS: usize = 64;

fn set_range(bits: &mut [u64], a: usize, b: usize) {
    let (wa, wb) = (a / 64, b / 64);
    let mask_from = |i: usize| !0u64 << (i % 64);
    let mask_to = |i: usize| !0u64 >> (63 - i % 64);
    if wa == wb {
        bits[wa] |= mask_from(a) & mask_to(b);
        return;
    }
    bits[wa] |= mask_from(a);
    for w in &mut bits[wa + 1..wb] {
        *w = !0;
    }
    bits[wb] |= mask_to(b);
}

/// Cell indices meeting the open interval `(lo, hi)`. Endpoints within rounding of a cell
/// boundary are snapped onto it.
fn cell_range(lo: f64, hi: f64, side: f64) -> (i64, i64) {
    let snap = |t: f64| if libm::fabs(t - libm::round(t)) < 1e-9 { libm::round(t) } else { t };
    let a = libm::floor(snap(lo * side)) as i64;
    let b = libm::ceil(snap(hi * side)) as i64 - 1;
    (a, b.max(a))
}

/// `[a, b]` reduced modulo `cells`, split at the wrap into at most two ranges.
fn wrapped((a, b): (i64, i64), cells: i64) -> ([(i64, i64); 2], usize) {
    if b - a + 1 >= cells {
        return ([(0, cells - 1), (0, 0)], 1);
    }
    let (a2, b2) = (a.rem_euclid(cells), b.rem_euclid(cells));
    if a2 <= b2 {
        ([(a2, b2), (0, 0)], 1)
    } else {
        ([(a2, cells - 1), (0, b2)], 2)
    }
}

fn push_wrapped(out: &mut Vec<(i64, i64)>, range: (i64, i64), cells: i64) {
    let (parts, k) = wrapped(range, cells);
    out.extend_from_slice(&parts[..k]);
}

fn merged_length(iv: &mut [(i64, i64)]) -> u64 {
    iv.sort_unstable();
    let mut total = 0u64;
    let mut cur: Option<(i64, i64)> = None;
    for &(a, b) in iv.iter() {
        cur = match cur {
            Some((s, e)) if a <= e + 1 => Some((s, e.max(b))),
            Some((s, e)) => {
                total += (e - s + 1) as u64;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((s, e)) = cur {
        total += (e - s + 1) as u64;
    }
    total
}

fn smallest_radius(a: &Mat<f64>, psi_n: f64) -> Result<f64> {
    let sv = crate::linalg::singular_values(a)?;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    Ok(psi_n / top)
}

/// Box-counting slope of the limsup set from the levels `n` in `n_window`.
///
/// Level `n` is counted at the dyadic depth matching its smallest ellipsoid semi-axis, so each level
/// contributes one point `(ln 2^depth, ln N)`. Levels whose depth falls outside `depth_range`, that
/// saturate the grid or that mark fewer than 4 cells are left out of the fit.
pub fn box_count_dimension(
    family: &MatrixFamily,
    psi: &PsiSpec,
    y: &[f64],
    n_window: (u64, u64),
    depth_range: (u32, u32),
) -> Result<BoxCountEstimate> {
    let (n0, n1) = n_window;
    if n0 == 0 || n1 < n0 {
        return Err(Error::InvalidInput("n window must satisfy 1 <= n0 <= N".into()));
    }
    let mut rows = Vec::new();
    for n in n0..=n1 {
        let a = generate_matrix(family, n)?.to_f64();
        let r = smallest_radius(&a, psi.at(n)?)?;
        let depth_f = libm::round(-libm::log2(r));
        if depth_f < depth_range.0 as f64 || depth_f > depth_range.1 as f64 {
            continue;
        }
        let depth = depth_f as u32;
        let count = count_cells(family, psi, y, n, depth)?;
        let total = 1u64 << (depth as u64 * family.d as u64);
        let saturated = count as f64 > 0.9 * total as f64;
        rows.push(BoxCountRow {
            n,
            depth,
            epsilon: libm::ldexp(1.0, -(depth as i32)),
            count,
            radius: r,
            saturated,
            used: !saturated && count >= 4,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.used)
        .map(|r| (r.depth as f64 * core::f64::consts::LN_2, libm::log(r.count as f64)))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientResolution(alloc::format!(
            "{} usable levels in the window; at least 3 are needed",
            xs.len()
        )));
    }
    let (slope, _, residual) = least_squares(&xs, &ys)?;
    Ok(BoxCountEstimate { rows, slope, residual, truncation: n_window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Rational, Scalar};
    use crate::spectra::{DiagonalSpec, FamilyKind};
    use alloc::vec;

    fn doubling() -> MatrixFamily {
        MatrixFamily::new(FamilyKind::Diagonal(DiagonalSpec::Base(vec![Rational::from_i64(2)])), true).unwrap()
    }

    #[test]
    fn one_dimensional_counts() {
        let psi = PsiSpec::exponential(core::f64::consts::LN_2);
        for n in 2..6 {
            assert_eq!(count_cells(&doubling(), &psi, &[0.0], n, 2 * n as u32).unwrap(), 1 << (n + 1));
        }
        let e = box_count_dimension(&doubling(), &psi, &[0.0], (3, 10), (0, 30)).unwrap();
        assert!((e.slope - 0.5).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn constant_psi_fills_half() {
        let psi = PsiSpec::Exponential { tau: 0.0, coeff: 0.25 };
        let e = box_count_dimension(&doubling(), &psi, &[0.0], (3, 12), (0, 30)).unwrap();
        assert!((e.slope - 1.0).abs() < 1e-9);
        for r in &e.rows {
            assert_eq!(r.count, 1 << (r.depth - 1));
        }
    }

    #[test]
    fn bit_ranges() {
        let mut b = vec![0u64; 3];
        set_range(&mut b, 3, 5);
        set_range(&mut b, 60, 130);
        assert_eq!(b.iter().map(|w| w.count_ones()).sum::<u32>(), 3 + 71);
    }

    #[test]
    fn wrapping_and_merging() {
        let mut v = Vec::new();
        push_wrapped(&mut v, (-2, 1), 8);
        assert_eq!(v, vec![(6, 7), (0, 1)]);
        assert_eq!(merged_length(&mut v), 4);
        let mut w = vec![(0, 3), (2, 5), (7, 7)];
        assert_eq!(merged_length(&mut w), 7);
    }

    #[test]
    fn too_few_levels() {
        let psi = PsiSpec::exponential(core::f64::consts::LN_2);
        assert!(matches!(
            box_count_dimension(&doubling(), &psi, &[0.0], (3, 4), (0, 30)),
            Err(Error::InsufficientResolution(_))
        ));
    }
}
