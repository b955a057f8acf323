use dimbound_core::lattice::oracle::{brute_force_minima, brute_force_minima_float};
use dimbound_core::lattice::{
    minkowski_sandwich, reduced_basis, successive_minima, LatticeData, MinimaOptions,
};
use dimbound_core::matrix::{combine, norm_sq, Mat};
use dimbound_core::scalar::{Rational, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_integer_matrix(rng: &mut ChaCha8Rng, d: usize) -> Mat<Rational> {
    loop {
        let rows: Vec<Vec<Rational>> =
            (0..d).map(|_| (0..d).map(|_| Rational::from_i64(rng.gen_range(-9..=9))).collect()).collect();
        let m = Mat::from_rows(rows).unwrap();
        if !m.det().vanishes() {
            return m;
        }
    }
}

#[test]
fn search_matches_oracle_on_random_integer_lattices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = MinimaOptions::default();
    for trial in 0..120 {
        let d = 2 + trial % 2;
        let a = random_integer_matrix(&mut rng, d);
        let lat = LatticeData::from_matrix(&a).unwrap();
        let found = successive_minima(&lat, &opts).unwrap();
        let oracle = brute_force_minima(&lat, 16).unwrap();
        assert_eq!(found.squared, oracle.squared, "matrix {a:?}");
        assert!(minkowski_sandwich(&lat, &found).holds);
        for (w, c) in found.witnesses.iter().zip(&found.coefficients) {
            assert_eq!(&combine(&lat.basis_vectors(), c), w);
            assert!(lat.contains(w).unwrap());
        }
    }
}

#[test]
fn float_search_matches_float_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = MinimaOptions::default();
    for trial in 0..60 {
        let d = 2 + trial % 2;
        let a = random_integer_matrix(&mut rng, d).to_f64();
        let lat = LatticeData::from_matrix(&a).unwrap();
        let found = successive_minima(&lat, &opts).unwrap();
        let oracle = brute_force_minima_float(&lat, 16).unwrap();
        for (x, y) in found.minima.iter().zip(&oracle.minima) {
            assert!((x - y).abs() <= 1e-9 * y.max(1.0), "{:?} vs {:?}", found.minima, oracle.minima);
        }
    }
}

#[test]
fn example_minima_for_small_powers() {
    let opts = MinimaOptions::default();
    for k in [150i64, 262] {
        let q = Rational::from_i64;
        let a = Mat::from_rows(vec![
            vec![q(10), q(5), q(0)],
            vec![q(5), q(5), q(0)],
            vec![q(0), q(0), q(k)],
        ])
        .unwrap();
        for n in 1..=5u32 {
            let lat = LatticeData::from_matrix(&a.pow(n as u64)).unwrap();
            let m = successive_minima(&lat, &opts).unwrap();
            let kn = num_traits::pow(q(k), n as usize);
            let fiven = num_traits::pow(q(5), n as usize);
            let expect = vec![
                q(1) / (kn.clone() * kn),
                q(1) / (fiven.clone() * fiven.clone()),
                q(1) / (fiven.clone() * fiven),
            ];
            assert_eq!(m.squared, expect, "k={k} n={n}");
        }
    }
}

#[test]
fn unimodular_scramble_of_axis_lattice_is_undone() {
    let q = Rational::from_i64;
    // columns of diag(1, 10) times a unimodular matrix with large entries
    let u = Mat::from_rows(vec![vec![q(13), q(8)], vec![q(21), q(13)]]).unwrap();
    let u = Mat::from_rows(vec![vec![q(13), q(8)], vec![q(8), q(5)]]).unwrap().mul(&u);
    assert_eq!(u.det().abs_val(), q(1));
    let basis = Mat::diag(&[q(1), q(10)]).mul(&u);
    let lat = LatticeData::from_basis(basis).unwrap();
    let m = successive_minima(&lat, &MinimaOptions::default()).unwrap();
    let r = reduced_basis(&lat, &m).unwrap();
    assert_eq!(norm_sq(&r.vectors[0]), q(1));
    assert_eq!(m.squared, vec![q(1), q(100)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_scales_every_minimum(seed in any::<u64>(), num in 1i64..20, den in 1i64..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_integer_matrix(&mut rng, 2 + (seed % 2) as usize);
        let lat = LatticeData::from_matrix(&a).unwrap();
        let t = Rational::new(num.into(), den.into());
        let opts = MinimaOptions::default();
        let base = successive_minima(&lat, &opts).unwrap();
        let scaled = successive_minima(&lat.scaled(&t), &opts).unwrap();
        for (s, b) in scaled.squared.iter().zip(&base.squared) {
            prop_assert_eq!(s.clone(), b.clone() * t.clone() * t.clone());
        }
    }

    #[test]
    fn reduced_basis_is_a_basis_with_first_vector_shortest(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_integer_matrix(&mut rng, 2 + (seed % 2) as usize);
        let lat = LatticeData::from_matrix(&a).unwrap();
        let m = successive_minima(&lat, &MinimaOptions::default()).unwrap();
        let r = reduced_basis(&lat, &m).unwrap();
        prop_assert_eq!(norm_sq(&r.vectors[0]), m.squared[0].clone());
        let det = Mat::from_rows(r.coefficients.iter().map(|c| c.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect()).unwrap().det();
        prop_assert_eq!(det.abs_val(), Rational::from_i64(1));
        prop_assert!(r.k_factor >= 1.0 && r.k_factor < 10.0);
    }
}
