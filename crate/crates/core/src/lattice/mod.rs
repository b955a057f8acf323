//! Lattices `A^{-1} Z^d`: covolume, successive minima, reduced bases and the h-profile.

pub mod hnf;
pub mod lll;
pub mod minima;
pub mod oracle;

use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{combine, dot, norm_sq, Mat};
use crate::scalar::{format_rational, rational_sqrt_exact, Rational, Scalar};
use crate::spectra::{generate_matrix, DiagonalSpec, FamilyKind, Matrix, MatrixFamily};

pub use minima::successive_minima;
pub use oracle::brute_force_minima;

/// Largest basis condition number accepted by the floating-point search.
pub const CONDITION_GUARD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaOptions {
    /// Enumeration nodes allowed across all `d` searches.
    pub node_budget: u64,
    /// LLL swaps allowed per reduction.
    pub max_swaps: u64,
}

impl Default for MinimaOptions {
    fn default() -> Self {
        MinimaOptions { node_budget: 20_000_000, max_swaps: 1_000_000 }
    }
}

/// A lattice given by a basis whose columns generate it.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeData<T> {
    pub basis: Mat<T>,
    pub covolume: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessiveMinima<T> {
    /// `m_k^2`, exact in rational mode.
    pub squared: Vec<T>,
    pub minima: Vec<f64>,
    pub witnesses: Vec<Vec<T>>,
    /// Integer coordinates of each witness in the input basis.
    pub coefficients: Vec<Vec<BigInt>>,
    /// Enumeration nodes visited.
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis<T> {
    pub vectors: Vec<Vec<T>>,
    pub coefficients: Vec<Vec<BigInt>>,
    /// `max_k max(|v_k| / m_k, m_k / |pi_k(v_k)|)`.
    pub k_factor: f64,
    /// `|pi_k(v_k)|`, the Gram-Schmidt lengths.
    pub projections: Vec<f64>,
}

impl<T: Scalar> LatticeData<T> {
    /// `Lambda = A^{-1} Z^d`.
    pub fn from_matrix(a: &Mat<T>) -> Result<Self> {
        let det = a.det();
        if det.vanishes() {
            return Err(Error::SingularMatrix);
        }
        let basis = a.inverse()?;
        Ok(LatticeData { basis, covolume: T::one() / det.abs_val() })
    }

    /// Lattice generated by the columns of `basis`.
    pub fn from_basis(basis: Mat<T>) -> Result<Self> {
        let det = basis.det();
        if det.vanishes() {
            return Err(Error::SingularMatrix);
        }
        Ok(LatticeData { basis, covolume: det.abs_val() })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Basis vectors (the columns of `basis`).
    pub fn basis_vectors(&self) -> Vec<Vec<T>> {
        self.basis.cols()
    }

    pub fn scaled(&self, t: &T) -> Self {
        let d = self.dim();
        let mut cov = self.covolume.clone();
        for _ in 0..d {
            cov = cov * t.abs_val();
        }
        LatticeData { basis: self.basis.scale(t), covolume: cov }
    }

    /// Condition number of the basis, `sigma_max / sigma_min`.
    pub fn condition_number(&self) -> Result<f64> {
        let ls = linalg::log_singular_values(&self.basis)?;
        Ok(libm::exp(ls[ls.len() - 1] - ls[0]))
    }

    pub(crate) fn check_condition(&self) -> Result<()> {
        if T::EXACT {
            return Ok(());
        }
        let c = self.condition_number()?;
        if !(c <= CONDITION_GUARD) {
            return Err(Error::IllConditioned(c));
        }
        Ok(())
    }

    /// True when `v` has integer coordinates in the basis (exact, or to `1e-9` in floating mode).
    pub fn contains(&self, v: &[T]) -> Result<bool> {
        let inv = self.basis.inverse()?;
        let x = inv.mul_vec(v);
        Ok(x.iter().all(|xi| {
            let r = xi.clone() - T::from_bigint(&xi.round_int());
            if T::EXACT {
                r.vanishes()
            } else {
                r.abs_val().to_f64() <= 1e-9
            }
        }))
    }
}

/// Basis `v_1..v_d` adapted to the successive minima: `|v_1| = m_1` and `|pi_k(v_k)|` comparable
/// to `m_k`, where `pi_k` projects away from `v_1..v_{k-1}`.
pub fn reduced_basis<T: Scalar>(data: &LatticeData<T>, mins: &SuccessiveMinima<T>) -> Result<ReducedBasis<T>> {
    let d = data.dim();
    let original = data.basis_vectors();
    let (h, v) = hnf::column_hnf(&mins.coefficients, d)?;
    let w = hnf::unimodular_inverse(&v)?;
    let mut coeffs = w;
    // witness_r = sum_{j<=r} h[r][j] b'_j with h[0][0] = 1 because w_1 is primitive
    if h[0][0] != BigInt::from(1) {
        return Err(Error::NumericalFailure("first witness is not primitive".into()));
    }
    let mut vectors: Vec<Vec<T>> = coeffs.iter().map(|c| combine(&original, c)).collect();
    let mut g = lll::gso(&vectors)?;
    for k in 1..d {
        lll::size_reduce(&mut vectors, &mut coeffs, &mut g, k);
    }
    let g = lll::gso(&vectors)?;
    let projections: Vec<f64> = g.b.iter().map(|b| libm::sqrt(b.to_f64())).collect();
    let mut k_factor = 1.0f64;
    for k in 0..d {
        let len = libm::sqrt(norm_sq(&vectors[k]).to_f64());
        let m = mins.minima[k];
        k_factor = k_factor.max(len / m).max(m / projections[k]);
    }
    Ok(ReducedBasis { vectors, coefficients: coeffs, k_factor, projections })
}

/// Unit-ball volume `V_d = pi^{d/2} / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    libm::pow(core::f64::consts::PI, d as f64 / 2.0) / libm::tgamma(d as f64 / 2.0 + 1.0)
}

/// Minkowski's second theorem: `c_d <= m_1 ... m_d / covol <= C_d`.
pub fn minkowski_constants(d: usize) -> (f64, f64) {
    let v = unit_ball_volume(d);
    let two_d = libm::pow(2.0, d as f64);
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    (two_d / (fact * v), two_d / v)
}

/// Bound `m_1 <= 2 (covol / V_d)^{1/d}` from Minkowski's first theorem.
pub fn first_minimum_bound(d: usize, covolume: f64) -> f64 {
    2.0 * libm::pow(covolume / unit_ball_volume(d), 1.0 / d as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichCheck {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub first_minimum_ok: bool,
    pub holds: bool,
}

pub fn minkowski_sandwich<T: Scalar>(data: &LatticeData<T>, mins: &SuccessiveMinima<T>) -> SandwichCheck {
    let d = data.dim();
    let ln_prod: f64 = mins.squared.iter().map(|s| 0.5 * s.ln_abs()).sum();
    let ratio = libm::exp(ln_prod - data.covolume.ln_abs());
    let (lower, upper) = minkowski_constants(d);
    let slack = 1e-9;
    let first_minimum_ok = mins.minima[0] <= first_minimum_bound(d, data.covolume.to_f64()) * (1.0 + slack);
    let holds = ratio >= lower * (1.0 - slack) && ratio <= upper * (1.0 + slack) && first_minimum_ok;
    SandwichCheck { ratio, lower, upper, first_minimum_ok, holds }
}

/// `"p/q"` when the minimum is rational, otherwise `"sqrt(p/q)"` of its square.
pub fn format_minimum(squared: &Rational) -> String {
    match rational_sqrt_exact(squared) {
        Some(r) => format_rational(&r),
        None => alloc::format!("sqrt({})", format_rational(squared)),
    }
}

/// Minima of `A_n^{-1} Z^d` for a family member, in exact mode when `A_n` is rational.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyMinima {
    Exact(SuccessiveMinima<Rational>),
    Float(SuccessiveMinima<f64>),
}

impl FamilyMinima {
    pub fn minima(&self) -> &[f64] {
        match self {
            FamilyMinima::Exact(m) => &m.minima,
            FamilyMinima::Float(m) => &m.minima,
        }
    }

    /// `ln m_k`, accurate for minima outside the `f64` range.
    pub fn ln_minima(&self) -> Vec<f64> {
        match self {
            FamilyMinima::Exact(m) => m.squared.iter().map(|s| 0.5 * s.ln_abs()).collect(),
            FamilyMinima::Float(m) => m.squared.iter().map(|s| 0.5 * libm::log(*s)).collect(),
        }
    }
}

pub fn family_minima(family: &MatrixFamily, n: u64, opts: &MinimaOptions) -> Result<FamilyMinima> {
    match generate_matrix(family, n)? {
        Matrix::Exact(a) => {
            let data = LatticeData::from_matrix(&a)?;
            Ok(FamilyMinima::Exact(successive_minima(&data, opts)?))
        }
        Matrix::Float(a) => {
            let data = LatticeData::from_matrix(&a)?;
            Ok(FamilyMinima::Float(successive_minima(&data, opts)?))
        }
    }
}

/// `h_{n,i} = -(1/n) ln m_i(A_n^{-1} Z^d)`, descending.
///
/// Diagonal families use the axis-aligned minima directly (the sorted inverse entries).
pub fn h_profile(family: &MatrixFamily, n: u64, opts: &MinimaOptions) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let mut h: Vec<f64> = match &family.kind {
        FamilyKind::Diagonal(DiagonalSpec::Rates(r)) => r.clone(),
        FamilyKind::Diagonal(DiagonalSpec::Base(v)) => v.iter().map(|a| a.ln_abs()).collect(),
        FamilyKind::Diagonal(DiagonalSpec::Sequence(_)) => {
            let a = generate_matrix(family, n)?.to_f64();
            (0..family.d).map(|i| libm::log(a[(i, i)].abs()) / n as f64).collect()
        }
        _ => family_minima(family, n, opts)?.ln_minima().iter().map(|x| -x / n as f64).collect(),
    };
    h.sort_by(|a, b| b.total_cmp(a));
    Ok(h)
}

/// Limits of `h_{n,i}` for families whose lattices have a closed form, descending.
///
/// Diagonal: the rates; scaled power: `ln |lambda|` for every index; Jordan: `ln |lambda_j|` with
/// multiplicity; powers of block-diagonal matrices whose blocks are scalars or `g U` with `U`
/// integral unimodular: `ln |a|` or `ln g`; power-minus-identity only for diagonal bases.
pub fn analytic_h(family: &MatrixFamily) -> Result<Vec<f64>> {
    let mut h: Vec<f64> = match &family.kind {
        FamilyKind::Diagonal(DiagonalSpec::Rates(r)) => r.clone(),
        FamilyKind::Diagonal(DiagonalSpec::Base(v)) => v.iter().map(|a| a.ln_abs()).collect(),
        FamilyKind::ScaledPower { lambda, .. } => {
            alloc::vec![libm::log((*lambda as f64).abs()); family.d]
        }
        FamilyKind::Jordan(blocks) => blocks
            .iter()
            .flat_map(|b| core::iter::repeat(b.lambda.ln_abs()).take(b.size))
            .collect(),
        FamilyKind::Power(Matrix::Exact(a)) => block_scales(a)?,
        FamilyKind::PowerMinusIdentity(Matrix::Exact(a)) if a.is_diagonal() => {
            (0..family.d).map(|i| a[(i, i)].ln_abs()).collect()
        }
        _ => return Err(Error::UnsupportedAnalytic("no closed form for the minima of this family".into())),
    };
    h.sort_by(|a, b| b.total_cmp(a));
    Ok(h)
}

/// Per-coordinate `ln` scale for a block-diagonal integer matrix with scalar-times-unimodular blocks.
fn block_scales(a: &Mat<Rational>) -> Result<Vec<f64>> {
    let unsupported = || Error::UnsupportedAnalytic("base is not block diagonal with scaled unimodular blocks".into());
    let ints = a.to_integer_rows().ok_or_else(unsupported)?;
    let d = a.dim();
    let mut out = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        // smallest block closed under the nonzero pattern
        let mut end = start + 1;
        let mut i = start;
        while i < end {
            for j in 0..d {
                if !ints[i][j].is_zero() || !ints[j][i].is_zero() {
                    if j < start {
                        return Err(unsupported());
                    }
                    end = end.max(j + 1);
                }
            }
            i += 1;
        }
        let block: Vec<Vec<BigInt>> = (start..end).map(|r| ints[r][start..end].to_vec()).collect();
        let g = block.iter().flatten().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let scaled: Vec<Vec<BigInt>> = block.iter().map(|r| r.iter().map(|x| x / &g).collect()).collect();
        let det = crate::matrix::integer_abs_det(&scaled);
        if det != BigInt::from(1) {
            return Err(unsupported());
        }
        let ln_g = crate::scalar::ln_abs_bigint(&g.abs());
        out.extend(core::iter::repeat(ln_g).take(end - start));
        start = end;
    }
    Ok(out)
}

/// Gram matrix of the basis vectors.
pub fn gram<T: Scalar>(vectors: &[Vec<T>]) -> Mat<T> {
    let d = vectors.len();
    let mut g = Mat::zeros(d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = dot(&vectors[i], &vectors[j]);
        }
    }
    g
}
