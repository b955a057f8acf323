use dimbound_core::dimension::dimnumber::{breakpoint_identity_check, min_equivalence, s_dimnumber, DimInputs, Ext};
use dimbound_core::dimension::formulas::{formula_diagonalizable, formula_hat, formula_jordan};
use dimbound_core::dimension::{dimension_bounds, min_over_pivots, s_hat_of, s_lower_of, s_upper_of, BoundsOptions};
use dimbound_core::empirical::preimages::{count_preimages, enumerate_preimages, membership_by_preimages, wn_membership};
use dimbound_core::matrix::Mat;
use dimbound_core::scalar::{Rational, Scalar};
use dimbound_core::spectra::{generate_matrix, DiagonalSpec, FamilyKind, Matrix, MatrixFamily, PsiSpec};
use num_bigint::BigInt;
use proptest::prelude::*;

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Exponents in `[0.2, 3]` with denominator 20.
fn rational_rates(d: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(4i64..=60, d).prop_map(|v| v.into_iter().map(|p| rat(p, 20)).collect())
}

fn sorted(mut l: Vec<Rational>) -> Vec<Rational> {
    l.sort();
    l
}

fn rational_dim_inputs() -> impl Strategy<Value = DimInputs<Rational>> {
    (1usize..=4)
        .prop_flat_map(|d| prop::collection::vec((1i64..=40, 0i64..=40, 1i64..=3), d))
        .prop_map(|cs| {
            let u: Vec<Rational> = cs.iter().map(|&(a, _, _)| rat(a, 10)).collect();
            let v = cs.iter().map(|&(a, b, _)| Ext::Finite(rat(a + b, 10))).collect();
            let delta = cs.iter().map(|&(_, _, w)| Rational::from_i64(w)).collect();
            DimInputs::new(u, v, Some(delta)).unwrap()
        })
}

fn min_s(inp: &DimInputs<f64>) -> f64 {
    (0..inp.dim()).map(|i| s_dimnumber(inp, i)).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn diagonal_upper_equals_lower_exactly(l in (2usize..=4).prop_flat_map(rational_rates), tau in 0i64..=60) {
        let l = sorted(l);
        let h: Vec<Rational> = l.iter().rev().cloned().collect();
        let tau = rat(tau, 20);
        for i in 0..l.len() {
            prop_assert_eq!(s_lower_of(&tau, &l, i).unwrap(), s_upper_of(&tau, &l, &h, i).unwrap());
        }
    }

    #[test]
    fn hat_dominates_both_bounds(
        l in prop::collection::vec(0.05f64..4.0, 2..=4),
        h in prop::collection::vec(0.05f64..4.0, 2..=4),
        tau in 0.0f64..3.0,
    ) {
        let d = l.len().min(h.len());
        let mut l = l[..d].to_vec();
        l.sort_by(f64::total_cmp);
        let mut h = h[..d].to_vec();
        h.sort_by(|a, b| b.total_cmp(a));
        for i in 0..d {
            let hat = s_hat_of(&tau, &l, i).unwrap();
            prop_assert!(hat >= s_lower_of(&tau, &l, i).unwrap() - 1e-12);
            prop_assert!(hat >= s_upper_of(&tau, &l, &h, i).unwrap() - 1e-12);
        }
    }

    #[test]
    fn closed_forms_are_monotone_and_bounded(
        moduli in prop::collection::vec(1.5f64..8.0, 1..=4),
        t0 in 0.0f64..3.0,
        dt in 0.0f64..1.0,
    ) {
        let d = moduli.len() as f64;
        let blocks: Vec<(f64, usize)> = moduli.iter().map(|&m| (m, 1)).collect();
        let fs: [&dyn Fn(f64) -> f64; 3] = [
            &|t| formula_diagonalizable(&moduli, t).unwrap(),
            &|t| formula_hat(&moduli, t).unwrap(),
            &|t| formula_jordan(&blocks, t).unwrap(),
        ];
        for f in fs {
            let (a, b) = (f(t0), f(t0 + dt));
            prop_assert!(b <= a + 1e-12, "{a} then {b}");
            prop_assert!((0.0..=d + 1e-12).contains(&a));
        }
    }

    #[test]
    fn min_over_indices_equals_min_over_breakpoints(inp in rational_dim_inputs()) {
        let c = min_equivalence(&inp).unwrap();
        prop_assert!(c.equal, "{:?} vs {:?}", c.min_over_breakpoints, c.min_over_indices);
        prop_assert!(breakpoint_identity_check(&inp));
    }

    #[test]
    // diverging coordinates grow like n^2 so the 1/n rate is carried by the finite ones
    fn min_dimnumber_is_continuous(
        cs in prop::collection::vec((1.0f64..4.0, 0.0f64..3.0, -0.1f64..0.1, -0.1f64..0.1, any::<bool>()), 1..=4),
    ) {
        let limit_v = |&(u, w, _, _, inf): &(f64, f64, f64, f64, bool)| if inf { Ext::Infinite } else { Ext::Finite(u + w) };
        let limit = DimInputs::new(cs.iter().map(|c| c.0).collect(), cs.iter().map(limit_v).collect(), None).unwrap();
        let target = min_s(&limit);
        for n in [1e2, 1e3, 1e4] {
            let u: Vec<f64> = cs.iter().map(|c| c.0 + c.2 / n).collect();
            let v = cs
                .iter()
                .zip(&u)
                .map(|(c, &un)| Ext::Finite(if c.4 { un + n * n } else { (c.0 + c.1 + c.3 / n).max(un) }))
                .collect();
            let seq = DimInputs::new(u, v, None).unwrap();
            prop_assert!((min_s(&seq) - target).abs() <= 10.0 / n, "n={n}: {} vs {target}", min_s(&seq));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn preimage_count_is_abs_det(a in -4i64..=4, b in -4i64..=4, c in -4i64..=4, e in -4i64..=4, n in 1u64..=3) {
        let m = Mat::from_rows(vec![vec![Rational::from_i64(a), Rational::from_i64(b)], vec![Rational::from_i64(c), Rational::from_i64(e)]]).unwrap();
        prop_assume!(!m.det().vanishes());
        let family = MatrixFamily::new(FamilyKind::Power(Matrix::Exact(m)), false).unwrap();
        let an = generate_matrix(&family, n).unwrap();
        let det = an.as_exact().unwrap().det();
        let expected: u128 = num_traits::Signed::abs(&det).to_integer().try_into().unwrap();
        prop_assume!(expected <= 200_000);
        prop_assert_eq!(count_preimages(&family, n, &[0.0, 0.0], 10_000_000).unwrap(), expected);
    }

    #[test]
    fn membership_agrees_with_ellipsoid_union(xs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 200), n in 1u64..=2) {
        let family = MatrixFamily::new(
            FamilyKind::ScaledPower { lambda: 5, base: Mat::from_rows(vec![
                vec![Rational::from_i64(2), Rational::from_i64(1)],
                vec![Rational::from_i64(1), Rational::from_i64(1)],
            ]).unwrap() },
            true,
        ).unwrap();
        let psi = PsiSpec::exponential(0.5);
        let y = [0.0, 0.0];
        let set = enumerate_preimages(&family, n, &y, 10_000_000).unwrap();
        let an = generate_matrix(&family, n).unwrap().to_f64();
        let psi_n = psi.at(n).unwrap();
        for (x0, x1) in xs {
            let x = [x0, x1];
            prop_assert_eq!(
                wn_membership(&x, &family, &psi, n, &y).unwrap(),
                membership_by_preimages(&x, &an, &set, psi_n),
                "x = {:?}", x
            );
        }
    }
}

#[test]
fn numeric_pipeline_recovers_diagonal_h() {
    let family = MatrixFamily::new(FamilyKind::Diagonal(DiagonalSpec::Rates(vec![0.4, 1.1, 2.3])), true).unwrap();
    let report = dimension_bounds(&family, &PsiSpec::exponential(0.7), 1..=6, &BoundsOptions::default()).unwrap();
    for row in &report.rows {
        for (h, l) in row.h.iter().zip(row.l.iter().rev()) {
            assert!((h - l).abs() < 1e-9, "{:?} vs {:?}", row.h, row.l);
        }
        assert_eq!(row.lower.0, row.upper.0);
    }
}

#[test]
fn scaled_power_upper_equals_hat() {
    let base = Mat::from_rows(vec![
        vec![Rational::from_i64(2), Rational::from_i64(1)],
        vec![Rational::from_i64(1), Rational::from_i64(1)],
    ])
    .unwrap();
    let family = MatrixFamily::new(FamilyKind::ScaledPower { lambda: 5, base }, true).unwrap();
    for tau in [0.1, 0.5, 1.0, 1.7, 2.5] {
        let report = dimension_bounds(&family, &PsiSpec::exponential(tau), 1..=8, &BoundsOptions::default()).unwrap();
        for row in &report.rows {
            assert!((row.upper.0 - row.hat.0).abs() < 1e-9, "tau {tau}: {row:?}");
            let d = row.l.len();
            let lower = min_over_pivots(d, |i| s_lower_of(&row.tau_n, &row.l, i)).unwrap().0;
            assert!((lower - row.lower.0).abs() < 1e-15);
        }
    }
}
