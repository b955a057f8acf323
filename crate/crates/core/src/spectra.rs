//! Matrix families, approximation functions and singular-value exponents.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};

/// A matrix held either exactly or in floating point.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Exact(Mat<Rational>),
    Float(Mat<f64>),
}

impl Matrix {
    pub fn dim(&self) -> usize {
        match self {
            Matrix::Exact(m) => m.dim(),
            Matrix::Float(m) => m.dim(),
        }
    }

    pub fn to_f64(&self) -> Mat<f64> {
        match self {
            Matrix::Exact(m) => m.to_f64(),
            Matrix::Float(m) => m.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&Mat<Rational>> {
        match self {
            Matrix::Exact(m) => Some(m),
            Matrix::Float(_) => None,
        }
    }

    pub fn pow(&self, n: u64) -> Matrix {
        match self {
            Matrix::Exact(m) => Matrix::Exact(m.pow(n)),
            Matrix::Float(m) => Matrix::Float(m.pow(n)),
        }
    }

    pub fn minus_identity(&self) -> Matrix {
        match self {
            Matrix::Exact(m) => Matrix::Exact(m.sub(&Mat::identity(m.dim()))),
            Matrix::Float(m) => Matrix::Float(m.sub(&Mat::identity(m.dim()))),
        }
    }

    /// `ln |det|`, robust to determinants outside the `f64` range.
    pub fn ln_abs_det(&self) -> Result<f64> {
        match self {
            Matrix::Exact(m) => {
                let det = m.det();
                if det.is_zero() {
                    return Err(Error::SingularMatrix);
                }
                Ok(det.ln_abs())
            }
            Matrix::Float(m) => {
                let det = m.det();
                if !(det.abs() > f64::MIN_POSITIVE) || !det.is_finite() {
                    return Err(Error::SingularMatrix);
                }
                Ok(libm::log(det.abs()))
            }
        }
    }

    /// Natural logs of the singular values, ascending.
    pub fn log_singular_values(&self) -> Result<Vec<f64>> {
        match self {
            Matrix::Exact(m) => linalg::log_singular_values(m),
            Matrix::Float(m) => match linalg::singular_values(m) {
                Ok(sv) if sv.iter().all(|s| *s > 0.0 && s.is_finite()) => Ok(sv.into_iter().map(libm::log).collect()),
                Ok(_) | Err(Error::NumericalFailure(_)) => linalg::log_singular_values(m),
                Err(e) => Err(e),
            },
        }
    }

    pub fn eigenvalue_moduli(&self) -> Result<Vec<f64>> {
        match self {
            Matrix::Exact(m) => linalg::eigenvalue_moduli(m),
            Matrix::Float(m) => linalg::eigenvalue_moduli(m),
        }
    }
}

/// Diagonal families `A_n = diag(...)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DiagonalSpec {
    /// `A_n = diag(a_1^n, ..., a_d^n)` with exact positive bases.
    Base(Vec<Rational>),
    /// `A_n = diag(e^{n r_1}, ..., e^{n r_d})`.
    Rates(Vec<f64>),
    /// Explicit entries per `n` (index `n - 1`).
    Sequence(Vec<Vec<f64>>),
}

/// One real Jordan block `J(lambda, size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanBlock {
    pub lambda: Rational,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `A_n` is entry `n - 1` of the list.
    ExplicitList(Vec<Matrix>),
    Power(Matrix),
    PowerMinusIdentity(Matrix),
    /// `(lambda A)^n` with `|det A| = 1`.
    ScaledPower { lambda: i64, base: Mat<Rational> },
    Diagonal(DiagonalSpec),
    Jordan(Vec<JordanBlock>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFamily {
    pub d: usize,
    pub kind: FamilyKind,
    /// Asserts that every base eigenvalue modulus exceeds 1.
    pub expanding: bool,
}

impl MatrixFamily {
    pub fn new(kind: FamilyKind, expanding: bool) -> Result<Self> {
        let d = match &kind {
            FamilyKind::ExplicitList(list) => list.first().map(Matrix::dim).ok_or_else(|| {
                Error::InvalidInput("explicit list is empty".into())
            })?,
            FamilyKind::Power(m) | FamilyKind::PowerMinusIdentity(m) => m.dim(),
            FamilyKind::ScaledPower { base, .. } => base.dim(),
            FamilyKind::Diagonal(DiagonalSpec::Base(v)) => v.len(),
            FamilyKind::Diagonal(DiagonalSpec::Rates(v)) => v.len(),
            FamilyKind::Diagonal(DiagonalSpec::Sequence(s)) => s.first().map(Vec::len).unwrap_or(0),
            FamilyKind::Jordan(blocks) => blocks.iter().map(|b| b.size).sum(),
        };
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        let fam = MatrixFamily { d, kind, expanding };
        fam.validate()?;
        Ok(fam)
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            FamilyKind::ExplicitList(list) => {
                if list.iter().any(|m| m.dim() != self.d) {
                    return Err(Error::InvalidInput("explicit list mixes dimensions".into()));
                }
            }
            FamilyKind::ScaledPower { lambda, base } => {
                if *lambda == 0 {
                    return Err(Error::InvalidInput("scale factor must be nonzero".into()));
                }
                if !base.is_integer() || !base.det().abs_val().is_one() {
                    return Err(Error::InvalidInput("scaled power needs an integer base with |det| = 1".into()));
                }
            }
            FamilyKind::Diagonal(DiagonalSpec::Base(v)) => {
                if v.iter().any(|x| !x.is_positive()) {
                    return Err(Error::InvalidInput("diagonal entries must be positive".into()));
                }
            }
            FamilyKind::Diagonal(DiagonalSpec::Rates(v)) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput("diagonal rates must be finite".into()));
                }
            }
            FamilyKind::Diagonal(DiagonalSpec::Sequence(s)) => {
                if s.iter().any(|row| row.len() != self.d || row.iter().any(|x| !(*x > 0.0))) {
                    return Err(Error::InvalidInput("diagonal entries must be positive".into()));
                }
            }
            FamilyKind::Jordan(blocks) => {
                if blocks.iter().any(|b| b.size == 0 || b.lambda.is_zero()) {
                    return Err(Error::InvalidInput("Jordan blocks need positive size and nonzero eigenvalue".into()));
                }
            }
            FamilyKind::Power(_) | FamilyKind::PowerMinusIdentity(_) => {}
        }
        if self.expanding {
            if let Some(moduli) = self.base_moduli()? {
                if let Some(&m) = moduli.iter().find(|&&m| m <= 1.0) {
                    return Err(Error::NotExpanding(m));
                }
            }
        }
        Ok(())
    }

    /// Eigenvalue moduli of the base matrix, ascending, for families generated by one.
    pub fn base_moduli(&self) -> Result<Option<Vec<f64>>> {
        let mut out = match &self.kind {
            FamilyKind::Power(m) | FamilyKind::PowerMinusIdentity(m) => m.eigenvalue_moduli()?,
            FamilyKind::ScaledPower { lambda, base } => {
                let scaled = base.scale(&Rational::from_i64(*lambda));
                linalg::eigenvalue_moduli(&scaled)?
            }
            FamilyKind::Jordan(blocks) => blocks
                .iter()
                .flat_map(|b| core::iter::repeat(b.lambda.abs_val().to_f64()).take(b.size))
                .collect(),
            FamilyKind::Diagonal(DiagonalSpec::Base(v)) => v.iter().map(|x| x.to_f64()).collect(),
            FamilyKind::Diagonal(DiagonalSpec::Rates(v)) => v.iter().map(|r| libm::exp(*r)).collect(),
            _ => return Ok(None),
        };
        out.sort_by(f64::total_cmp);
        Ok(Some(out))
    }

    pub fn is_diagonal(&self) -> bool {
        match &self.kind {
            FamilyKind::Diagonal(_) => true,
            FamilyKind::Jordan(blocks) => blocks.iter().all(|b| b.size == 1),
            FamilyKind::Power(m) | FamilyKind::PowerMinusIdentity(m) => match m {
                Matrix::Exact(m) => m.is_diagonal(),
                Matrix::Float(m) => m.is_diagonal(),
            },
            FamilyKind::ScaledPower { base, .. } => base.is_diagonal(),
            FamilyKind::ExplicitList(list) => list.iter().all(|m| match m {
                Matrix::Exact(m) => m.is_diagonal(),
                Matrix::Float(m) => m.is_diagonal(),
            }),
        }
    }
}

/// `J(lambda, size)^n`: entry `(r, r + k)` is `C(n, k) lambda^(n - k)`.
pub fn jordan_block_power(lambda: &Rational, size: usize, n: u64) -> Mat<Rational> {
    let mut m = Mat::<Rational>::zeros(size);
    let mut binom = BigInt::one();
    for k in 0..size.min(n as usize + 1) {
        if k > 0 {
            binom = binom * BigInt::from(n - k as u64 + 1) / BigInt::from(k as u64);
        }
        let entry = Rational::from_integer(binom.clone()) * num_traits::pow(lambda.clone(), n as usize - k);
        for r in 0..size - k {
            m[(r, r + k)] = entry.clone();
        }
    }
    m
}

/// Returns `A_n`.
pub fn generate_matrix(family: &MatrixFamily, n: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let d = family.d;
    let m = match &family.kind {
        FamilyKind::ExplicitList(list) => list
            .get(n as usize - 1)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(alloc::format!("explicit list has no entry for n = {n}")))?,
        FamilyKind::Power(a) => a.pow(n),
        FamilyKind::PowerMinusIdentity(a) => a.pow(n).minus_identity(),
        FamilyKind::ScaledPower { lambda, base } => {
            let s = Rational::from_integer(num_traits::pow(BigInt::from(*lambda), n as usize));
            Matrix::Exact(base.pow(n).scale(&s))
        }
        FamilyKind::Diagonal(DiagonalSpec::Base(v)) => {
            Matrix::Exact(Mat::diag(&v.iter().map(|a| num_traits::pow(a.clone(), n as usize)).collect::<Vec<_>>()))
        }
        FamilyKind::Diagonal(DiagonalSpec::Rates(r)) => {
            Matrix::Float(Mat::diag(&r.iter().map(|x| libm::exp(n as f64 * x)).collect::<Vec<_>>()))
        }
        FamilyKind::Diagonal(DiagonalSpec::Sequence(s)) => Matrix::Float(Mat::diag(
            s.get(n as usize - 1)
                .ok_or_else(|| Error::InvalidInput(alloc::format!("diagonal sequence has no entry for n = {n}")))?,
        )),
        FamilyKind::Jordan(blocks) => {
            let mut m = Mat::<Rational>::zeros(d);
            let mut off = 0;
            for b in blocks {
                let p = jordan_block_power(&b.lambda, b.size, n);
                for r in 0..b.size {
                    for c in 0..b.size {
                        m[(off + r, off + c)] = p[(r, c)].clone();
                    }
                }
                off += b.size;
            }
            Matrix::Exact(m)
        }
    };
    m.ln_abs_det()?;
    Ok(m)
}

/// Approximation function `psi`.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    /// `coeff * e^{-tau n}`.
    Exponential { tau: f64, coeff: f64 },
    /// `coeff * n^{-alpha}`.
    PowerLaw { alpha: f64, coeff: f64 },
    /// `psi(1), ..., psi(N)`.
    Table(Vec<f64>),
}

impl PsiSpec {
    pub fn exponential(tau: f64) -> Self {
        PsiSpec::Exponential { tau, coeff: 1.0 }
    }

    pub fn power_law(alpha: f64) -> Self {
        PsiSpec::PowerLaw { alpha, coeff: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PsiSpec::Exponential { tau, coeff } => {
                if !(*tau >= 0.0) || !tau.is_finite() {
                    return Err(Error::InvalidPsi("tau must be finite and nonnegative".into()));
                }
                if !(*coeff > 0.0) || !coeff.is_finite() {
                    return Err(Error::InvalidPsi("psi must be positive".into()));
                }
            }
            PsiSpec::PowerLaw { alpha, coeff } => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidPsi("alpha must be positive".into()));
                }
                if !(*coeff > 0.0) || !coeff.is_finite() {
                    return Err(Error::InvalidPsi("psi must be positive".into()));
                }
            }
            PsiSpec::Table(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidPsi("psi table is empty".into()));
                }
                if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    return Err(Error::InvalidPsi("psi must be positive".into()));
                }
                if v.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidPsi("psi must be nonincreasing".into()));
                }
            }
        }
        Ok(())
    }

    /// `ln psi(n)`, evaluated without underflow.
    pub fn ln_at(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidPsi("psi is evaluated at n >= 1".into()));
        }
        match self {
            PsiSpec::Exponential { tau, coeff } => Ok(libm::log(*coeff) - tau * n as f64),
            PsiSpec::PowerLaw { alpha, coeff } => Ok(libm::log(*coeff) - alpha * libm::log(n as f64)),
            PsiSpec::Table(v) => v
                .get(n as usize - 1)
                .map(|x| libm::log(*x))
                .ok_or_else(|| Error::InvalidPsi(alloc::format!("psi table has no value for n = {n}"))),
        }
    }

    pub fn at(&self, n: u64) -> Result<f64> {
        Ok(libm::exp(self.ln_at(n)?))
    }

    /// `tau_n = -(1/n) ln psi(n)`.
    pub fn tau_n(&self, n: u64) -> Result<f64> {
        match self {
            PsiSpec::Exponential { tau, coeff } if *coeff == 1.0 => Ok(*tau),
            _ => Ok(-self.ln_at(n)? / n as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerOrder {
    pub tau: f64,
    /// Set for tables whose `tau_n` tail is not monotone over the window.
    pub non_monotone_tail: bool,
}

/// Lower order at infinity `liminf -ln psi(n) / n`.
pub fn lower_order_at_infinity(psi: &PsiSpec, horizon: u64) -> Result<LowerOrder> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    match psi {
        PsiSpec::Exponential { tau, .. } => Ok(LowerOrder { tau: *tau, non_monotone_tail: false }),
        PsiSpec::PowerLaw { .. } => Ok(LowerOrder { tau: 0.0, non_monotone_tail: false }),
        PsiSpec::Table(v) => {
            if v.is_empty() {
                return Err(Error::InvalidPsi("psi table is empty".into()));
            }
            let hi = horizon.min(v.len() as u64);
            let lo = (hi / 2).max(1);
            let taus: Vec<f64> = (lo..=hi).map(|n| psi.tau_n(n)).collect::<Result<_>>()?;
            let tau = taus.iter().copied().fold(f64::INFINITY, f64::min);
            let up = taus.windows(2).any(|w| w[1] > w[0] + 1e-12);
            let down = taus.windows(2).any(|w| w[1] < w[0] - 1e-12);
            Ok(LowerOrder { tau, non_monotone_tail: up && down })
        }
    }
}

/// Per-`n` exponents `(tau_n, l_{n,i}, h_{n,i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    pub n: u64,
    pub tau_n: f64,
    /// Ascending.
    pub l: Vec<f64>,
    /// Descending; filled by the lattice module.
    pub h: Option<Vec<f64>>,
}

impl SpectralProfile {
    pub fn with_h(mut self, h: Vec<f64>) -> Self {
        self.h = Some(h);
        self
    }
}

/// `(1/n) ln sigma_i(A_n)`, ascending.
pub fn singular_exponents(family: &MatrixFamily, n: u64) -> Result<Vec<f64>> {
    let mut l: Vec<f64> = match &family.kind {
        FamilyKind::Diagonal(DiagonalSpec::Rates(r)) => r.clone(),
        FamilyKind::Diagonal(DiagonalSpec::Base(v)) => v.iter().map(|a| a.ln_abs()).collect(),
        _ => {
            let m = generate_matrix(family, n)?;
            m.log_singular_values()?.into_iter().map(|x| x / n as f64).collect()
        }
    };
    l.sort_by(f64::total_cmp);
    Ok(l)
}

pub fn spectral_profile(family: &MatrixFamily, psi: &PsiSpec, n: u64) -> Result<SpectralProfile> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let tau_n = psi.tau_n(n)?;
    let l = singular_exponents(family, n)?;
    Ok(SpectralProfile { n, tau_n, l, h: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccumulationMethod {
    Analytic,
    Clustered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccumulationSet {
    pub points: Vec<Vec<f64>>,
    pub method: AccumulationMethod,
    /// Largest distance from a sample to its cluster centroid (clustered mode).
    pub residual: f64,
    /// First `n` after which every sample stays within the merge radius of its centroid.
    pub settled_from: Option<u64>,
    /// Indices `n` past the burn-in with `l_{n,1} <= 0`.
    pub nonpositive: Vec<u64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccumulationMode {
    Analytic,
    Clustered { merge_radius: f64, burn_in: u64 },
}

impl AccumulationMode {
    pub fn clustered() -> Self {
        AccumulationMode::Clustered { merge_radius: 1e-3, burn_in: 10 }
    }
}

/// Logs of the base eigenvalue moduli, ascending.
pub fn analytic_exponents(family: &MatrixFamily) -> Result<Vec<f64>> {
    if !family.expanding {
        return Err(Error::UnsupportedAnalytic("family is not flagged as expanding".into()));
    }
    let moduli = family
        .base_moduli()?
        .ok_or_else(|| Error::UnsupportedAnalytic("family has no base matrix".into()))?;
    if let Some(m) = moduli.iter().find(|&&m| m <= 1.0) {
        return Err(Error::UnsupportedAnalytic(alloc::format!("eigenvalue modulus {m} is not expanding")));
    }
    Ok(match &family.kind {
        FamilyKind::Diagonal(DiagonalSpec::Rates(r)) => {
            let mut r = r.clone();
            r.sort_by(f64::total_cmp);
            r
        }
        _ => moduli.iter().map(|m| libm::log(*m)).collect(),
    })
}

pub fn accumulation_set(
    family: &MatrixFamily,
    n_range: core::ops::RangeInclusive<u64>,
    mode: AccumulationMode,
) -> Result<AccumulationSet> {
    match mode {
        AccumulationMode::Analytic => Ok(AccumulationSet {
            points: vec![analytic_exponents(family)?],
            method: AccumulationMethod::Analytic,
            residual: 0.0,
            settled_from: None,
            nonpositive: Vec::new(),
            notes: Vec::new(),
        }),
        AccumulationMode::Clustered { merge_radius, burn_in } => {
            let ns: Vec<u64> = n_range.collect();
            if ns.is_empty() {
                return Err(Error::InvalidInput("n range is empty".into()));
            }
            let samples: Vec<Vec<f64>> = ns.iter().map(|&n| singular_exponents(family, n)).collect::<Result<_>>()?;
            Ok(cluster_samples(&ns, &samples, merge_radius, burn_in))
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Single-linkage clustering of per-`n` exponent vectors.
pub fn cluster_samples(ns: &[u64], samples: &[Vec<f64>], merge_radius: f64, burn_in: u64) -> AccumulationSet {
    let k = samples.len();
    let mut label: Vec<usize> = (0..k).collect();
    fn find(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..k {
        for j in 0..i {
            if dist(&samples[i], &samples[j]) <= merge_radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..k).map(|i| find(&mut label, i)).collect();
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, r) in roots.iter().enumerate() {
        match groups.iter_mut().find(|(root, _)| root == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((*r, vec![i])),
        }
    }
    let d = samples[0].len();
    let centroids: Vec<Vec<f64>> = groups
        .iter()
        .map(|(_, members)| {
            let mut c = vec![0.0; d];
            for &m in members {
                for (ci, x) in c.iter_mut().zip(&samples[m]) {
                    *ci += x;
                }
            }
            c.iter().map(|x| x / members.len() as f64).collect()
        })
        .collect();
    let mut residual = 0.0f64;
    let mut last_far: Option<usize> = None;
    for (g, (_, members)) in groups.iter().enumerate() {
        for &m in members {
            let r = dist(&samples[m], &centroids[g]);
            residual = residual.max(r);
            if r > merge_radius {
                last_far = Some(last_far.map_or(m, |x: usize| x.max(m)));
            }
        }
    }
    let settled_from = match last_far {
        None => Some(ns[0]),
        Some(i) if i + 1 < k => Some(ns[i + 1]),
        Some(_) => None,
    };
    let nonpositive: Vec<u64> =
        ns.iter().zip(samples).filter(|(n, s)| **n > burn_in && s[0] <= 0.0).map(|(n, _)| *n).collect();
    let mut notes = Vec::new();
    if !nonpositive.is_empty() {
        notes.push(String::from("smallest exponent is not positive past the burn-in; accumulation points may leave the positive orthant"));
    }
    if centroids.len() > 1 {
        notes.push(alloc::format!("{} clusters at merge radius {merge_radius}", centroids.len()));
    }
    AccumulationSet {
        points: centroids,
        method: AccumulationMethod::Clustered,
        residual,
        settled_from,
        nonpositive,
        notes,
    }
}
