//! Runs the ten acceptance criteria in sequence and prints one PASS/FAIL line for each.

use std::time::{Duration, Instant};

use anyhow::{anyhow, Result};
use dimbound::commands::{fig1, fig2, fig2_default_grid, integer_preset_levels};
use dimbound::format::parse_grid;
use dimbound::presets;
use dimbound_core::dimension::dimnumber::{breakpoint_identity_check, min_equivalence, s_dimnumber, DimInputs, Ext};
use dimbound_core::dimension::formulas::formula_jordan;
use dimbound_core::dimension::series::{critical_exponent_check, ASeq};
use dimbound_core::dimension::{dimension_bounds, s_lower_of, s_upper_of, BoundsMode, BoundsOptions};
use dimbound_core::empirical::boxcount::box_count_dimension;
use dimbound_core::empirical::fiber::fiber_scaling;
use dimbound_core::empirical::preimages::count_preimages;
use dimbound_core::lattice::oracle::brute_force_minima;
use dimbound_core::lattice::{family_minima, minkowski_sandwich, successive_minima, FamilyMinima, LatticeData, MinimaOptions};
use dimbound_core::matrix::Mat;
use dimbound_core::scalar::{Rational, Scalar};
use dimbound_core::spectra::{generate_matrix, FamilyKind, JordanBlock, Matrix, MatrixFamily, PsiSpec};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

fn counterexample_exponents() -> (f64, f64) {
    let r5 = 5f64.sqrt();
    ((5.0 * (3.0 - r5) / 2.0).ln(), (5.0 * (3.0 + r5) / 2.0).ln())
}

fn scaled_power_curves() -> Result<Outcome> {
    let (l1, l2) = counterexample_exponents();
    let taus = parse_grid("0.1:3.0:0.1").map_err(|e| anyhow!(e))?;
    let rows = fig1(&taus)?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut strict_below = false;
    for r in &rows {
        if r.tau < (l2 - l1) / 2.0 {
            worst = worst.max((r.s_upper_formula - 2.0 * l2 / (r.tau + l2)).abs());
            strict_below |= r.s_lower_formula < r.s_upper_formula - 1e-9;
            checked += 1;
        } else if r.tau > l2 - l1 {
            let coincident = ((l1 + l2) / (r.tau + l1)).min(2.0 * l2 / (r.tau + l2));
            worst = worst.max((r.s_upper_formula - coincident).abs());
            worst = worst.max((r.s_lower_formula - r.s_upper_formula).abs());
            checked += 1;
        }
    }
    outcome(
        rows.len() == 30 && worst <= 1e-9 && strict_below,
        format!("{checked} grid points checked, max deviation {worst:.2e}, lower strictly below upper somewhere: {strict_below}"),
    )
}

fn block_example_bounds() -> Result<Outcome> {
    let k = presets::EXAMPLE_K;
    let grid = fig2_default_grid(k);
    let rows = fig2(k, &grid)?;
    let ordered = rows.iter().all(|r| r.s_lower < r.s_upper && r.s_upper < r.s_hat);
    let at1 = &fig2(k, &[1.0])?[0];
    // independent high-precision evaluation of the substituted closed forms
    let reference = [2.3928407161486926, 2.4400678847781768, 2.5432639079326349];
    let quoted = [2.39293, 2.44005, 2.54327];
    let got = [at1.s_lower, at1.s_upper, at1.s_hat];
    let dev = got.iter().zip(&reference).map(|(g, r)| (g - r).abs()).fold(0.0, f64::max);
    let quoted_dev = got.iter().zip(&quoted).map(|(g, r)| (g - r).abs()).fold(0.0, f64::max);
    // the generic pipeline with closed-form exponents gives the same three numbers
    let family = presets::family("example1", Some(k)).map_err(|e| anyhow!(e))?;
    let opts = BoundsOptions { mode: BoundsMode::Analytic, ..BoundsOptions::default() };
    let generic = dimension_bounds(&family, &PsiSpec::exponential(1.0), 1..=1, &opts)?;
    let generic_dev = [generic.s_lower - got[0], generic.s_upper - got[1], generic.s_hat - got[2]]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    outcome(
        ordered && !rows.is_empty() && dev < 5e-6 && generic_dev < 1e-9,
        format!(
            "{} grid points ordered: {ordered}; tau=1 gives ({:.6}, {:.6}, {:.6}), reference deviation {dev:.1e}, \
             generic pipeline deviation {generic_dev:.1e}, deviation from the quoted (2.39293, 2.44005, 2.54327) {quoted_dev:.1e}",
            rows.len(),
            got[0],
            got[1],
            got[2]
        ),
    )
}

/// `-log_c(m^2)` when `m^2` is an integral power of `1/c`.
fn exact_log(m2: &Rational, c: &Rational) -> Option<u64> {
    let mut x = m2.clone();
    let mut e = 0;
    while x < <Rational as Scalar>::one() {
        x = x * c.clone();
        e += 1;
    }
    (x == <Rational as Scalar>::one()).then_some(e)
}

fn diagonal_equality() -> Result<Outcome> {
    // bases c^{p_i} with c = 6/5; exponents and tau are rational in units of ln c, and every bound is
    // homogeneous of degree zero in (tau, l, h), so the comparison is exact
    let c = rat(6, 5);
    let unit = (1.2f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = MinimaOptions::default();
    let mut comparisons = 0;
    for trial in 0..100 {
        let d = 2 + trial % 3;
        let p: Vec<u64> = (0..d).map(|_| rng.gen_range(((0.2 / unit).ceil() as u64)..=((3.0 / unit).floor() as u64))).collect();
        let tau = rat(rng.gen_range(0..=(3.0 / unit * 4.0) as i64), 4);
        let n = rng.gen_range(1..=3u64);
        let a = Mat::diag(&p.iter().map(|&pi| num_traits::pow(c.clone(), (pi * n) as usize)).collect::<Vec<_>>());
        let mins = successive_minima(&LatticeData::from_matrix(&a)?, &opts)?;
        let mut h = Vec::new();
        for m2 in &mins.squared {
            let e = exact_log(m2, &c).ok_or_else(|| anyhow!("minimum {m2} is not a power of 5/6"))?;
            h.push(rat(e as i64, 2 * n as i64));
        }
        let mut l: Vec<Rational> = p.iter().map(|&pi| rat(pi as i64, 1)).collect();
        l.sort();
        for i in 0..d {
            if s_lower_of(&tau, &l, i)? != s_upper_of(&tau, &l, &h, i)? {
                return outcome(false, format!("trial {trial}: p = {p:?}, tau = {tau}, n = {n}, pivot {i} differs"));
            }
            comparisons += 1;
        }
    }
    outcome(true, format!("100 families, {comparisons} pivot comparisons equal in exact arithmetic, h taken from the lattice minima"))
}

fn lattice_suite() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = MinimaOptions::default();
    let mut sandwich = true;
    for trial in 0..200 {
        let d = 2 + trial % 2;
        let a = loop {
            let rows = (0..d).map(|_| (0..d).map(|_| Rational::from_i64(rng.gen_range(-9..=9))).collect()).collect();
            let m = Mat::from_rows(rows)?;
            if !m.det().vanishes() {
                break m;
            }
        };
        let lat = LatticeData::from_matrix(&a)?;
        let found = successive_minima(&lat, &opts)?;
        if found.squared != brute_force_minima(&lat, 16)?.squared {
            return outcome(false, format!("trial {trial}: search and oracle disagree on {a:?}"));
        }
        sandwich &= minkowski_sandwich(&lat, &found).holds;
    }
    for k in [150i64, 262] {
        let family = presets::family("example1", Some(k as u64)).map_err(|e| anyhow!(e))?;
        for n in 1..=4u32 {
            let FamilyMinima::Exact(m) = family_minima(&family, n as u64, &opts)? else {
                return outcome(false, "example minima were not computed exactly".into());
            };
            let inv = |b: i64| num_traits::pow(rat(1, b), 2 * n as usize);
            let expect = vec![inv(k), inv(5), inv(5)];
            if m.squared != expect {
                return outcome(false, format!("k = {k}, n = {n}: squared minima {:?}", m.squared));
            }
            let a = generate_matrix(&family, n as u64)?;
            let lat = LatticeData::from_matrix(a.as_exact().expect("integer family"))?;
            sandwich &= minkowski_sandwich(&lat, &m).holds;
        }
    }
    outcome(sandwich, format!("200 random lattices match the oracle, example minima exact for n <= 4, sandwich holds: {sandwich}"))
}

fn min_s(inp: &DimInputs<f64>) -> f64 {
    (0..inp.dim()).map(|i| s_dimnumber(inp, i)).fold(f64::INFINITY, f64::min)
}

fn dimensional_numbers() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut equiv, mut ident) = (0, 0);
    for _ in 0..1000 {
        let d = rng.gen_range(1..=4);
        let u: Vec<Rational> = (0..d).map(|_| rat(rng.gen_range(1..=60), rng.gen_range(1..=12))).collect();
        let v = u.iter().map(|x| Ext::Finite(x.clone() + rat(rng.gen_range(0..=40), rng.gen_range(1..=12)))).collect();
        let delta = (0..d).map(|_| rat(rng.gen_range(1..=6), rng.gen_range(1..=3))).collect();
        let inp = DimInputs::new(u, v, Some(delta))?;
        equiv += min_equivalence(&inp)?.equal as usize;
        ident += breakpoint_identity_check(&inp) as usize;
    }
    // diverging coordinates grow like n^2 so the 1/n rate is carried by the finite ones
    let mut worst_scaled = 0.0f64;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=4);
        let cs: Vec<(f64, f64, f64, f64, bool)> = (0..d)
            .map(|_| {
                (rng.gen_range(1.0..4.0), rng.gen_range(0.0..3.0), rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), rng.gen_bool(0.3))
            })
            .collect();
        let v = cs.iter().map(|c| if c.4 { Ext::Infinite } else { Ext::Finite(c.0 + c.1) }).collect();
        let target = min_s(&DimInputs::new(cs.iter().map(|c| c.0).collect(), v, None)?);
        for n in [1e2, 1e3, 1e4] {
            let u: Vec<f64> = cs.iter().map(|c| c.0 + c.2 / n).collect();
            let v = cs
                .iter()
                .zip(&u)
                .map(|(c, &un)| Ext::Finite(if c.4 { un + n * n } else { (c.0 + c.1 + c.3 / n).max(un) }))
                .collect();
            let seq = DimInputs::new(u, v, None)?;
            worst_scaled = worst_scaled.max((min_s(&seq) - target).abs() * n);
        }
    }
    outcome(
        equiv == 1000 && ident == 1000 && worst_scaled <= 10.0,
        format!("equivalence {equiv}/1000, breakpoint identity {ident}/1000, continuity max n*|error| = {worst_scaled:.3} (limit 10)"),
    )
}

fn jordan_cross_check() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = BoundsOptions::default();
    let mut worst = (0.0f64, String::new());
    let mut failures = 0;
    for _ in 0..20 {
        let d = rng.gen_range(2..=4usize);
        let mut sizes = Vec::new();
        let mut left = d;
        while left > 0 {
            let s = rng.gen_range(1..=left);
            sizes.push(s);
            left -= s;
        }
        let blocks: Vec<JordanBlock> = sizes
            .iter()
            .map(|&size| {
                let p = rng.gen_range(6..=32i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
                JordanBlock { lambda: rat(p, 4), size }
            })
            .collect();
        let tau = (rng.gen_range(0.1f64..2.5) * 100.0).round() / 100.0;
        let moduli: Vec<(f64, usize)> = blocks.iter().map(|b| (b.lambda.abs().to_f64(), b.size)).collect();
        let formula = formula_jordan(&moduli, tau)?;
        let family = MatrixFamily::new(FamilyKind::Jordan(blocks), true)?;
        let report = dimension_bounds(&family, &PsiSpec::exponential(tau), 20..=60, &opts)?;
        let dev = (report.s_lower - formula).abs().max((report.s_upper - formula).abs());
        failures += (dev > 5e-2) as usize;
        if dev > worst.0 {
            worst = (dev, format!("blocks {moduli:?}, tau {tau}: formula {formula:.4}, pipeline [{:.4}, {:.4}]", report.s_lower, report.s_upper));
        }
    }
    outcome(failures == 0, format!("{failures}/20 configurations outside 5e-2; worst {:.3} at {}", worst.0, worst.1))
}

fn fiber_exponents() -> Result<Outcome> {
    let (_, l2) = counterexample_exponents();
    let tau = 0.5;
    let s = fiber_scaling(5, &presets::counterexample_base(), &rat(1, 3), &PsiSpec::exponential(tau), (4, 12), 4000.0)?;
    let e = l2 - tau;
    let gap_rel = (s.gap_exponent + e).abs() / e;
    let count_rel = (s.count_exponent - e).abs() / e;
    let (lo, hi) = s.rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.length_ratio.0), b.max(r.length_ratio.1)));
    outcome(
        gap_rel <= 0.05 && count_rel <= 0.05,
        format!(
            "expected {e:.4}; gap exponent {:.4} ({:.1}%), count exponent {:.4} ({:.1}%); length ratios in [{lo:.3}, {hi:.3}]",
            s.gap_exponent,
            100.0 * gap_rel,
            s.count_exponent,
            100.0 * count_rel
        ),
    )
}

fn box_counts() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    let (_, l2) = counterexample_exponents();
    let cases: [(&str, Option<(u64, u64)>, f64, f64); 4] = [
        ("cor18", None, 0.5, 0.1),
        ("calibration", None, 1.0, 0.05),
        ("calibration2d", None, 2.0, 0.05),
        ("fig1", Some((1, 4)), 2.0 * l2 / (0.5 + l2), 0.15),
    ];
    for (name, window, expect, tol) in cases {
        let cfg = presets::config(name, None).map_err(|e| anyhow!(e))?;
        let family = cfg.family().map_err(|e| anyhow!(e))?;
        let window = window.unwrap_or((cfg.n_range[0], cfg.n_range[1]));
        let est = box_count_dimension(&family, &cfg.psi_spec(), &vec![0.0; family.d], window, (0, 30))?;
        let ok = (est.slope - expect).abs() <= tol;
        pass &= ok;
        parts.push(format!("{name} {:.4} (expect {expect:.4} +- {tol})", est.slope));
    }
    outcome(pass, parts.join("; "))
}

fn critical_exponents() -> Result<Outcome> {
    let presets = [(2.0, 0.5), (2.0, 1.0), (3.0, 0.25), (3.0, 2.0), (5.0, 0.7), (10.0, 1.5), (1.5, 0.1), (1.5, 1.0), (4.0, 3.0), (7.0, 0.05)];
    let mut worst = 0.0f64;
    let mut closed_worst = 0.0f64;
    for (b, tau) in presets {
        let c = critical_exponent_check(&ASeq::Geometric(b), &PsiSpec::exponential(tau), 4000)?;
        worst = worst.max((c.exponent - c.formula).abs());
        closed_worst = closed_worst.max((c.formula - b.ln() / (b.ln() + tau)).abs());
    }
    outcome(
        worst <= 0.02 && closed_worst <= 1e-9,
        format!("10 geometric presets, max |exponent - formula| = {worst:.4}, formula vs ln b/(ln b + tau) {closed_worst:.1e}"),
    )
}

fn preimage_counts() -> Result<Outcome> {
    let levels = integer_preset_levels(10_000_000);
    let mut total = 0u128;
    for (name, family, n) in &levels {
        let a = generate_matrix(family, *n)?;
        let Matrix::Exact(a) = a else {
            return outcome(false, format!("{name} n = {n} is not exact"));
        };
        let det = Signed::abs(&a.det());
        if !det.is_integer() {
            return outcome(false, format!("{name} n = {n} has non-integral determinant"));
        }
        let expect: u128 = det.to_integer().try_into().map_err(|_| anyhow!("determinant exceeds u128"))?;
        let count = count_preimages(family, *n, &vec![0.0; family.d], 20_000_000)?;
        if count != expect {
            return outcome(false, format!("{name} n = {n}: {count} preimages, |det| = {expect}"));
        }
        total += count;
    }
    outcome(!levels.is_empty(), format!("{} preset levels, {total} preimages in all, every count equals |det A_n|", levels.len()))
}

fn main() {
    // libtest arguments such as --nocapture are accepted and ignored
    let criteria: [(&str, Duration, fn() -> Result<Outcome>); 10] = [
        ("scaled-power bound curves", Duration::from_secs(5), scaled_power_curves),
        ("block example bounds", Duration::from_secs(5), block_example_bounds),
        ("diagonal equality", Duration::from_secs(10), diagonal_equality),
        ("lattice oracle suite", Duration::from_secs(60), lattice_suite),
        ("dimensional numbers", Duration::from_secs(10), dimensional_numbers),
        ("Jordan cross-check", Duration::from_secs(120), jordan_cross_check),
        ("fiber scaling", Duration::from_secs(120), fiber_exponents),
        ("box counting", Duration::from_secs(600), box_counts),
        ("one-dimensional critical exponent", Duration::from_secs(30), critical_exponents),
        ("preimage counts", Duration::from_secs(60), preimage_counts),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= *limit, o.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
        println!("{} criterion {:>2} {name}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" }, i + 1);
        failed += !pass as usize;
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
