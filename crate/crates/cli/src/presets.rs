//! Built-in families: the scaled-power counterexample, the three-dimensional block example, the
//! doubling map and a few calibration cases.

use dimbound_core::matrix::Mat;
use dimbound_core::scalar::{Rational, Scalar};
use dimbound_core::spectra::{DiagonalSpec, FamilyKind, Matrix, MatrixFamily};

use crate::config::{Arithmetic, Budgets, FamilyConfig, Mode, PsiConfig, RunConfig, SCHEMA_VERSION};

pub const NAMES: &[&str] = &["fig1", "fig2", "example1", "cor18", "diagonal", "calibration", "calibration2d"];

/// Default `k` of the block example.
pub const EXAMPLE_K: u64 = 262;

fn int_mat(rows: &[&[i64]]) -> Mat<Rational> {
    Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rational::from_i64(x)).collect()).collect())
        .expect("square preset matrix")
}

/// `A = [[2, 1], [1, 1]]`, scaled by 5 in the counterexample family.
pub fn counterexample_base() -> Mat<Rational> {
    int_mat(&[&[2, 1], &[1, 1]])
}

/// `diag(5 [[2, 1], [1, 1]], k)`.
pub fn example1_matrix(k: u64) -> Mat<Rational> {
    int_mat(&[&[10, 5, 0], &[5, 5, 0], &[0, 0, k as i64]])
}

pub fn family(name: &str, k: Option<u64>) -> Result<MatrixFamily, String> {
    let kind = match name {
        "fig1" => FamilyKind::ScaledPower { lambda: 5, base: counterexample_base() },
        "fig2" | "example1" => FamilyKind::Power(Matrix::Exact(example1_matrix(k.unwrap_or(EXAMPLE_K)))),
        "cor18" | "calibration" => FamilyKind::Diagonal(DiagonalSpec::Base(vec![Rational::from_i64(2)])),
        "calibration2d" => FamilyKind::Diagonal(DiagonalSpec::Base(vec![Rational::from_i64(2); 2])),
        "diagonal" => FamilyKind::Diagonal(DiagonalSpec::Rates(vec![1.0, 2.0])),
        _ => return Err(format!("unknown preset {name:?}; expected one of {}", NAMES.join(", "))),
    };
    MatrixFamily::new(kind, true).map_err(|e| e.to_string())
}

/// Full run configuration for a preset, with its customary `psi` and `n` range.
pub fn config(name: &str, k: Option<u64>) -> Result<RunConfig, String> {
    family(name, k)?;
    let (psi, n_range) = match name {
        "fig1" => (PsiConfig::Exponential { tau: 0.5, coefficient: 1.0 }, [1, 30]),
        "fig2" | "example1" => (PsiConfig::Exponential { tau: 1.0, coefficient: 1.0 }, [1, 20]),
        "cor18" => (PsiConfig::Exponential { tau: core::f64::consts::LN_2, coefficient: 1.0 }, [3, 10]),
        "calibration" => (PsiConfig::Exponential { tau: 0.0, coefficient: 0.25 }, [3, 12]),
        "calibration2d" => (PsiConfig::Exponential { tau: 0.0, coefficient: 0.25 }, [2, 7]),
        _ => (PsiConfig::Exponential { tau: 1.0, coefficient: 1.0 }, [1, 20]),
    };
    Ok(RunConfig {
        schema: SCHEMA_VERSION,
        family: FamilyConfig::Preset { name: name.to_string(), k },
        expanding: true,
        psi,
        tau_grid: None,
        n_range,
        mode: Mode::Numeric,
        arithmetic: Arithmetic::Rational,
        budgets: Budgets::default(),
        output: None,
        seed: 0,
    })
}
