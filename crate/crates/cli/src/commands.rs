//! Subcommand bodies. Each returns a serializable report (and CSV text where the output is tabular).

use anyhow::{anyhow, bail, Result};
use dimbound_core::dimension::formulas::{example1_exponents, example1_small_tau, formula_counterexample};
use dimbound_core::dimension::{
    dimension_bounds, min_over_pivots, s_hat_of, s_lower_of, s_upper_of, BoundsMode, BoundsOptions, BoundsReport,
};
use dimbound_core::empirical::boxcount::box_count_dimension;
use dimbound_core::empirical::covering::covering_count;
use dimbound_core::empirical::fiber::fiber_scaling;
use dimbound_core::empirical::liouville::{liouville_gap_check, QuadraticSlope};
use dimbound_core::empirical::preimages::{count_preimages, enumerate_preimages, membership_by_preimages, wn_membership};
use dimbound_core::lattice::{
    format_minimum, minkowski_sandwich, reduced_basis, successive_minima, LatticeData, MinimaOptions,
};
use dimbound_core::scalar::{format_rational, parse_rational, Rational, Scalar};
use dimbound_core::spectra::{generate_matrix, FamilyKind, Matrix, MatrixFamily, PsiSpec};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig, SCHEMA_VERSION};
use crate::format::{csv_text, sig9};
use crate::presets;

/// Tags a core error with the module that raised it.
pub fn core<T>(module: &str, r: dimbound_core::error::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!("{module}: {e}"))
}

fn opts_from(cfg: &RunConfig) -> BoundsOptions {
    let mut opts = BoundsOptions {
        mode: match cfg.mode {
            Mode::Numeric => BoundsMode::Numeric,
            Mode::Analytic => BoundsMode::Analytic,
        },
        ..BoundsOptions::default()
    };
    opts.minima.node_budget = cfg.budgets.minima_nodes;
    opts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: u64,
    pub tau_n: f64,
    pub s_lower: f64,
    /// 1-based pivot attaining the minimum.
    pub argmin_lower: usize,
    pub s_upper: f64,
    pub argmin_upper: usize,
    pub s_hat: f64,
    pub argmin_hat: usize,
    pub l: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValues {
    pub s_lower: String,
    pub s_upper: String,
    pub s_hat: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub s_lower: f64,
    pub s_upper: f64,
    pub s_hat: f64,
    pub regime: String,
    pub tail_from: Option<u64>,
    pub oscillation: [f64; 3],
    /// `"p/q"` values when every input is rational.
    pub exact: Option<ExactValues>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsJson {
    pub schema: u32,
    pub config: RunConfig,
    pub rows: Vec<BoundsRow>,
    pub aggregate: Aggregate,
    pub notes: Vec<String>,
}

/// Per-pivot minima of the three bounds for rational exponents, with `h = l` (diagonal lattices).
pub fn exact_diagonal_bounds(rates: &[Rational], tau: &Rational) -> Result<[(Rational, usize); 3]> {
    let mut l = rates.to_vec();
    l.sort();
    let mut h = l.clone();
    h.reverse();
    let d = l.len();
    Ok([
        core("dimension", min_over_pivots(d, |i| s_lower_of(tau, &l, i)))?,
        core("dimension", min_over_pivots(d, |i| s_upper_of(tau, &l, &h, i)))?,
        core("dimension", min_over_pivots(d, |i| s_hat_of(tau, &l, i)))?,
    ])
}

fn exact_values(cfg: &RunConfig) -> Result<Option<ExactValues>> {
    if cfg.arithmetic != crate::config::Arithmetic::Rational {
        return Ok(None);
    }
    let (Some(rates), crate::config::PsiConfig::Exponential { tau, coefficient }) = (cfg.family.exact_rates(), &cfg.psi) else {
        return Ok(None);
    };
    if *coefficient != 1.0 {
        return Ok(None);
    }
    let tau = parse_rational(&format!("{tau}")).ok_or_else(|| anyhow!("tau is not a finite decimal"))?;
    let [lo, up, hat] = exact_diagonal_bounds(&rates, &tau)?;
    Ok(Some(ExactValues {
        s_lower: format_rational(&lo.0),
        // the diagonal short-circuit sets the upper bound to the lower one
        s_upper: format_rational(&up.0),
        s_hat: format_rational(&hat.0),
    }))
}

pub fn bounds_report(cfg: &RunConfig) -> Result<BoundsReport> {
    let family = cfg.family().map_err(|e| anyhow!("config: {e}"))?;
    core("dimension", dimension_bounds(&family, &cfg.psi_spec(), cfg.n_range(), &opts_from(cfg)))
}

/// CSV with columns `(n, tau_n, min_s_lower, argmin, min_s_upper, argmin, min_s_hat, argmin)` and a
/// final aggregate row, plus the JSON summary.
pub fn bounds(cfg: &RunConfig) -> Result<(String, BoundsJson)> {
    let report = bounds_report(cfg)?;
    let rows: Vec<BoundsRow> = report
        .rows
        .iter()
        .map(|r| BoundsRow {
            n: r.n,
            tau_n: r.tau_n,
            s_lower: r.lower.0,
            argmin_lower: r.lower.1 + 1,
            s_upper: r.upper.0,
            argmin_upper: r.upper.1 + 1,
            s_hat: r.hat.0,
            argmin_hat: r.hat.1 + 1,
            l: r.l.clone(),
            h: r.h.clone(),
        })
        .collect();
    let header = ["n", "tau_n", "min_s_lower", "argmin_lower", "min_s_upper", "argmin_upper", "min_s_hat", "argmin_hat"];
    let mut table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                sig9(r.tau_n),
                sig9(r.s_lower),
                r.argmin_lower.to_string(),
                sig9(r.s_upper),
                r.argmin_upper.to_string(),
                sig9(r.s_hat),
                r.argmin_hat.to_string(),
            ]
        })
        .collect();
    let label = if report.tail_from.is_some() { "limsup" } else { "analytic" };
    table.push(vec![
        label.into(),
        String::new(),
        sig9(report.s_lower),
        String::new(),
        sig9(report.s_upper),
        String::new(),
        sig9(report.s_hat),
        String::new(),
    ]);
    let json = BoundsJson {
        schema: SCHEMA_VERSION,
        config: cfg.clone(),
        rows,
        aggregate: Aggregate {
            s_lower: report.s_lower,
            s_upper: report.s_upper,
            s_hat: report.s_hat,
            regime: report.regime.as_str().into(),
            tail_from: report.tail_from,
            oscillation: report.oscillation,
            exact: exact_values(cfg)?,
        },
        notes: report.notes.clone(),
    };
    Ok((csv_text(&header, &table)?, json))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub tau: f64,
    pub s_upper_formula: f64,
    pub s_lower_formula: f64,
}

/// Upper curve from the closed form for `(5A)^n`, lower curve from the analytic bound pipeline.
pub fn fig1(taus: &[f64]) -> Result<Vec<Fig1Row>> {
    let family = presets::family("fig1", None).map_err(|e| anyhow!(e))?;
    let base = presets::counterexample_base();
    let opts = BoundsOptions { mode: BoundsMode::Analytic, ..BoundsOptions::default() };
    taus.iter()
        .map(|&tau| {
            let upper = core("dimension", formula_counterexample(5, &base, tau))?.value;
            let lower = core("dimension", dimension_bounds(&family, &PsiSpec::exponential(tau), 1..=1, &opts))?.s_lower;
            Ok(Fig1Row { tau, s_upper_formula: upper, s_lower_formula: lower })
        })
        .collect()
}

pub fn fig1_csv(rows: &[Fig1Row]) -> Result<String> {
    let table: Vec<Vec<String>> =
        rows.iter().map(|r| vec![sig9(r.tau), sig9(r.s_upper_formula), sig9(r.s_lower_formula)]).collect();
    csv_text(&["tau", "s_upper_formula", "s_lower_formula"], &table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub tau: f64,
    pub s_hat: f64,
    pub s_upper: f64,
    pub s_lower: f64,
}

/// `(3 l_3/(tau + l_3), (tau + 3 l_2)/(tau + l_2), (2 tau + 3 l_1)/(tau + l_1))` on `(0, l_2 - 2 l_1)`.
pub fn fig2(k: u64, taus: &[f64]) -> Result<Vec<Fig2Row>> {
    taus.iter()
        .map(|&tau| {
            let [s_hat, s_upper, s_lower] = core("dimension", example1_small_tau(k, tau))?;
            Ok(Fig2Row { tau, s_hat, s_upper, s_lower })
        })
        .collect()
}

/// Default grid for the block example: steps of 0.05 strictly inside `(0, l_2 - 2 l_1)`.
pub fn fig2_default_grid(k: u64) -> Vec<f64> {
    let [l1, l2, _] = example1_exponents(k);
    let top = l2 - 2.0 * l1;
    (1..).map(|i| i as f64 * 0.05).take_while(|t| *t < top - 1e-9).map(|t| (t * 1e12).round() / 1e12).collect()
}

pub fn fig2_csv(rows: &[Fig2Row]) -> Result<String> {
    let table: Vec<Vec<String>> =
        rows.iter().map(|r| vec![sig9(r.tau), sig9(r.s_hat), sig9(r.s_upper), sig9(r.s_lower)]).collect();
    csv_text(&["tau", "s_hat", "s_upper", "s_lower"], &table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub n: u64,
    /// `"p/q"`, `"sqrt(p/q)"` in exact mode, decimals otherwise.
    pub minima: Vec<String>,
    pub minima_values: Vec<f64>,
    /// Reduced basis vectors.
    pub basis: Vec<Vec<String>>,
    pub h: Vec<f64>,
    pub sandwich_ratio: f64,
    pub sandwich_holds: bool,
    pub nodes: u64,
}

pub fn lattice(family: &MatrixFamily, n: u64, opts: &MinimaOptions) -> Result<LatticeReport> {
    let nf = n as f64;
    match core("spectra", generate_matrix(family, n))? {
        Matrix::Exact(a) => {
            let data = core("lattice", LatticeData::from_matrix(&a))?;
            let mins = core("lattice", successive_minima(&data, opts))?;
            let red = core("lattice", reduced_basis(&data, &mins))?;
            let s = minkowski_sandwich(&data, &mins);
            Ok(LatticeReport {
                n,
                minima: mins.squared.iter().map(format_minimum).collect(),
                minima_values: mins.minima.clone(),
                basis: red.vectors.iter().map(|v| v.iter().map(format_rational).collect()).collect(),
                h: mins.squared.iter().map(|q| -0.5 * q.ln_abs() / nf).collect(),
                sandwich_ratio: s.ratio,
                sandwich_holds: s.holds,
                nodes: mins.nodes,
            })
        }
        Matrix::Float(a) => {
            let data = core("lattice", LatticeData::from_matrix(&a))?;
            let mins = core("lattice", successive_minima(&data, opts))?;
            let red = core("lattice", reduced_basis(&data, &mins))?;
            let s = minkowski_sandwich(&data, &mins);
            Ok(LatticeReport {
                n,
                minima: mins.minima.iter().map(|m| sig9(*m)).collect(),
                minima_values: mins.minima.clone(),
                basis: red.vectors.iter().map(|v| v.iter().map(|x| sig9(*x)).collect()).collect(),
                h: mins.minima.iter().map(|m| -m.ln() / nf).collect(),
                sandwich_ratio: s.ratio,
                sandwich_holds: s.holds,
                nodes: mins.nodes,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageReport {
    pub n: u64,
    /// `#F_n(y)`, as a decimal string.
    pub count: String,
    /// `|det A_n|` for integer `A_n`.
    pub abs_det: Option<String>,
    pub method: String,
}

pub fn preimages(family: &MatrixFamily, n: u64, y: &[f64], budget: u64) -> Result<PreimageReport> {
    let a = core("spectra", generate_matrix(family, n))?;
    if let Some(m) = a.as_exact().filter(|m| m.is_integer()) {
        let count = core("empirical", count_preimages(family, n, y, budget))?;
        let det = m.det().abs().to_integer();
        return Ok(PreimageReport { n, count: count.to_string(), abs_det: Some(det.to_string()), method: "slicing".into() });
    }
    let set = core("empirical", enumerate_preimages(family, n, y, budget))?;
    Ok(PreimageReport { n, count: set.len().to_string(), abs_det: None, method: format!("{:?}", set.method).to_lowercase() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub inside: u64,
    pub agree: u64,
    pub disagree: u64,
}

/// Compares the direct membership test with the union-of-ellipsoids test on seeded random points.
pub fn membership(
    family: &MatrixFamily,
    psi: &PsiSpec,
    n: u64,
    y: &[f64],
    samples: u64,
    seed: u64,
    budget: u64,
) -> Result<MembershipReport> {
    let set = core("empirical", enumerate_preimages(family, n, y, budget))?;
    let a = core("spectra", generate_matrix(family, n))?.to_f64();
    let psi_n = core("spectra", psi.at(n))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut inside, mut agree) = (0, 0);
    for _ in 0..samples {
        let x: Vec<f64> = (0..family.d).map(|_| rng.gen::<f64>()).collect();
        let direct = core("empirical", wn_membership(&x, family, psi, n, y))?;
        let union = membership_by_preimages(&x, &a, &set, psi_n);
        inside += direct as u64;
        agree += (direct == union) as u64;
    }
    Ok(MembershipReport { n, samples, seed, inside, agree, disagree: samples - agree })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountJson {
    pub slope: f64,
    pub residual: f64,
    pub n_window: [u64; 2],
    pub rows: Vec<BoxCountRowJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountRowJson {
    pub n: u64,
    pub depth: u32,
    pub epsilon: f64,
    pub count: u64,
    pub used: bool,
}

pub fn boxcount(family: &MatrixFamily, psi: &PsiSpec, y: &[f64], n_window: (u64, u64)) -> Result<(String, BoxCountJson)> {
    let e = core("empirical", box_count_dimension(family, psi, y, n_window, (0, 30)))?;
    let rows: Vec<BoxCountRowJson> = e
        .rows
        .iter()
        .map(|r| BoxCountRowJson { n: r.n, depth: r.depth, epsilon: r.epsilon, count: r.count, used: r.used })
        .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.depth.to_string(), sig9(r.epsilon), r.count.to_string(), r.n.to_string(), r.used.to_string()])
        .collect();
    let csv = csv_text(&["depth", "epsilon", "count", "n", "used"], &table)?;
    Ok((csv, BoxCountJson { slope: e.slope, residual: e.residual, n_window: [n_window.0, n_window.1], rows }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberRowJson {
    pub n: u64,
    pub window: f64,
    pub count: usize,
    pub min_gap: f64,
    pub length_ratio: [f64; 2],
    pub count_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberJson {
    pub x: String,
    pub tau: f64,
    pub expected_exponent: f64,
    pub gap_exponent: f64,
    pub count_exponent: f64,
    pub sin_alpha: f64,
    pub rows: Vec<FiberRowJson>,
}

/// Fiber scaling for the scaled-power preset at fiber coordinate `x`.
pub fn fiber(tau: f64, x: &str, n_range: (u64, u64), target: f64) -> Result<FiberJson> {
    let xr = parse_rational(x).ok_or_else(|| anyhow!("fiber coordinate {x:?} is not a rational"))?;
    let base = presets::counterexample_base();
    let psi = PsiSpec::exponential(tau);
    let s = core("empirical", fiber_scaling(5, &base, &xr, &psi, n_range, target))?;
    let l2 = core("dimension", formula_counterexample(5, &base, tau))?.l[1];
    Ok(FiberJson {
        x: format_rational(&xr),
        tau,
        expected_exponent: l2 - tau,
        gap_exponent: s.gap_exponent,
        count_exponent: s.count_exponent,
        sin_alpha: s.rows.first().map(|r| r.sin_alpha).unwrap_or(f64::NAN),
        rows: s
            .rows
            .iter()
            .map(|r| FiberRowJson {
                n: r.n,
                window: r.window.length,
                count: r.count,
                min_gap: r.min_gap,
                length_ratio: [r.length_ratio.0, r.length_ratio.1],
                count_bound: r.count_bound,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleJson {
    pub slope: f64,
    pub m: u64,
    pub z: [i64; 2],
    pub holds: bool,
    pub checked: u64,
    pub min_scaled_distance: f64,
    pub m0: f64,
}

/// Gap check for the slope `(p + q sqrt(D)) / r`.
pub fn liouville(pqdr: [i64; 4], m: u64, z: (i64, i64)) -> Result<LiouvilleJson> {
    let [p, q, d, r] = pqdr;
    let slope = core("empirical", QuadraticSlope::new(p, q, d, r))?;
    let g = core("empirical", liouville_gap_check(&slope, m, z))?;
    Ok(LiouvilleJson {
        slope: core("empirical", slope.value())?.to_f64(),
        m,
        z: [z.0, z.1],
        holds: g.holds,
        checked: g.checked,
        min_scaled_distance: g.min_scaled_distance,
        m0: g.m0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringJson {
    pub n: u64,
    /// 1-based pivot.
    pub k: usize,
    pub formula: f64,
    pub ln_formula: f64,
    pub gamma: Vec<usize>,
    pub tiles: u64,
    pub lattice_points: u64,
    pub translates: String,
    pub constructive: f64,
    pub ratio: f64,
}

pub fn covering(family: &MatrixFamily, psi: &PsiSpec, n: u64, k: usize) -> Result<CoveringJson> {
    if k == 0 {
        bail!("pivot k is 1-based");
    }
    let c = core("empirical", covering_count(family, psi, n, k - 1))?;
    Ok(CoveringJson {
        n,
        k,
        formula: c.formula(),
        ln_formula: c.ln_formula,
        gamma: c.gamma.iter().map(|i| i + 1).collect(),
        tiles: c.tiles,
        lattice_points: c.lattice_points,
        translates: c.translates.to_string(),
        constructive: c.constructive,
        ratio: c.ratio,
    })
}

/// Integer presets whose `|det A_n|` is small enough to enumerate, as `(name, family, n)`.
pub fn integer_preset_levels(limit: u64) -> Vec<(String, MatrixFamily, u64)> {
    let mut out = Vec::new();
    for name in ["fig1", "example1", "cor18", "calibration2d"] {
        let fam = presets::family(name, None).expect("preset");
        for n in 1.. {
            let Ok(a) = generate_matrix(&fam, n) else { break };
            let ln_det = a.ln_abs_det().unwrap_or(f64::INFINITY);
            if ln_det > (limit as f64).ln() + 1e-9 {
                break;
            }
            out.push((name.to_string(), fam.clone(), n));
        }
    }
    out
}

pub fn is_integer_family(family: &MatrixFamily) -> bool {
    match &family.kind {
        FamilyKind::ScaledPower { .. } => true,
        _ => matches!(generate_matrix(family, 1), Ok(Matrix::Exact(m)) if m.is_integer()),
    }
}
