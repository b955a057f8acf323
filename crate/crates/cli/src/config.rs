//! Run configuration files (`"schema": 1`) and their translation into core types.

use std::fmt;

use dimbound_core::matrix::Mat;
use dimbound_core::scalar::{parse_rational, Rational, Scalar};
use dimbound_core::spectra::{DiagonalSpec, FamilyKind, JordanBlock, Matrix, MatrixFamily, PsiSpec};
use serde::{Deserialize, Serialize};

use crate::presets;

pub const SCHEMA_VERSION: u32 = 1;

/// A matrix entry: a JSON number or a string such as `"3/2"` or `"-0.125"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            // shortest round-trip decimal, so 0.1 reads as 1/10
            Entry::Number(v) if v.is_finite() => parse_rational(&format!("{v}")),
            Entry::Number(_) => None,
            Entry::Text(s) => parse_rational(s),
        }
    }
}

impl From<i64> for Entry {
    fn from(v: i64) -> Self {
        Entry::Number(v as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub lambda: Entry,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Preset {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u64>,
    },
    /// `diag(e^{n r_1}, ..., e^{n r_d})`.
    DiagonalRates { rates: Vec<Entry> },
    /// `diag(a_1^n, ..., a_d^n)`.
    DiagonalBase { base: Vec<Entry> },
    Power { matrix: Vec<Vec<Entry>> },
    PowerMinusIdentity { matrix: Vec<Vec<Entry>> },
    ScaledPower { lambda: i64, base: Vec<Vec<Entry>> },
    Jordan { blocks: Vec<BlockConfig> },
    ExplicitList { matrices: Vec<Vec<Vec<Entry>>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiConfig {
    /// `coefficient * e^{-tau n}`.
    Exponential {
        tau: f64,
        #[serde(default = "one")]
        coefficient: f64,
    },
    /// `coefficient * n^{-alpha}`.
    PowerLaw {
        alpha: f64,
        #[serde(default = "one")]
        coefficient: f64,
    },
    Table { values: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Numeric,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    #[default]
    Rational,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_preimages")]
    pub preimages: u64,
    #[serde(default = "default_cells")]
    pub cells: u64,
    #[serde(default = "default_nodes")]
    pub minima_nodes: u64,
}

fn default_preimages() -> u64 {
    dimbound_core::empirical::preimages::PREIMAGE_BUDGET
}
fn default_cells() -> u64 {
    dimbound_core::empirical::boxcount::CELL_BUDGET
}
fn default_nodes() -> u64 {
    dimbound_core::lattice::MinimaOptions::default().node_budget
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { preimages: default_preimages(), cells: default_cells(), minima_nodes: default_nodes() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub family: FamilyConfig,
    #[serde(default = "yes")]
    pub expanding: bool,
    pub psi: PsiConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_grid: Option<Vec<f64>>,
    pub n_range: [u64; 2],
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

/// A validation failure, located at a line of the source text when one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// First line (1-based) mentioning `"key"`.
fn locate(src: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    src.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}

impl RunConfig {
    /// Parses and validates a configuration file's text.
    pub fn parse(src: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(src).map_err(|e| ConfigError {
            line: Some(e.line()),
            field: "config".into(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|mut e| {
            let key = e.field.rsplit('.').next().unwrap_or(&e.field).to_string();
            e.line = locate(src, &key);
            e
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |field: &str, message: &str| ConfigError { line: None, field: field.into(), message: message.into() };
        if self.schema != SCHEMA_VERSION {
            return Err(err("schema", &format!("unsupported schema {}; expected {SCHEMA_VERSION}", self.schema)));
        }
        let [n0, n1] = self.n_range;
        if n0 == 0 || n1 < n0 {
            return Err(err("n_range", "n range must be nonempty with 1 <= n0 <= n1"));
        }
        if let Some(grid) = &self.tau_grid {
            if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
                return Err(err("tau_grid", "tau grid must be nonempty, finite and strictly increasing"));
            }
        }
        let b = &self.budgets;
        if b.preimages == 0 || b.cells == 0 || b.minima_nodes == 0 {
            return Err(err("budgets", "budgets must be positive"));
        }
        if let PsiConfig::Table { values } = &self.psi {
            if values.windows(2).any(|w| w[1] > w[0]) {
                return Err(err("psi.values", "psi must be nonincreasing"));
            }
            if (values.len() as u64) < n1 {
                return Err(err("psi.values", "psi table is shorter than the n range"));
            }
        }
        self.psi_spec().validate().map_err(|e| err("psi", &e.to_string()))?;
        self.family().map_err(|e| err("family", &e))?;
        Ok(())
    }

    pub fn psi_spec(&self) -> PsiSpec {
        self.psi.to_spec()
    }

    pub fn family(&self) -> Result<MatrixFamily, String> {
        self.family.build(self.expanding, self.arithmetic)
    }

    pub fn n_range(&self) -> std::ops::RangeInclusive<u64> {
        self.n_range[0]..=self.n_range[1]
    }
}

impl PsiConfig {
    pub fn to_spec(&self) -> PsiSpec {
        match self {
            PsiConfig::Exponential { tau, coefficient } => PsiSpec::Exponential { tau: *tau, coeff: *coefficient },
            PsiConfig::PowerLaw { alpha, coefficient } => PsiSpec::PowerLaw { alpha: *alpha, coeff: *coefficient },
            PsiConfig::Table { values } => PsiSpec::Table(values.clone()),
        }
    }
}

fn entries(row: &[Entry]) -> Result<Vec<Rational>, String> {
    row.iter()
        .map(|e| e.to_rational().ok_or_else(|| format!("unreadable entry {e:?}")))
        .collect()
}

fn exact_matrix(rows: &[Vec<Entry>]) -> Result<Mat<Rational>, String> {
    let rows = rows.iter().map(|r| entries(r)).collect::<Result<Vec<_>, _>>()?;
    Mat::from_rows(rows).map_err(|e| e.to_string())
}

fn matrix(rows: &[Vec<Entry>], arithmetic: Arithmetic) -> Result<Matrix, String> {
    let m = exact_matrix(rows)?;
    Ok(match arithmetic {
        Arithmetic::Rational => Matrix::Exact(m),
        Arithmetic::Float => Matrix::Float(m.to_f64()),
    })
}

impl FamilyConfig {
    pub fn build(&self, expanding: bool, arithmetic: Arithmetic) -> Result<MatrixFamily, String> {
        let kind = match self {
            FamilyConfig::Preset { name, k } => return presets::family(name, *k),
            FamilyConfig::DiagonalRates { rates } => {
                FamilyKind::Diagonal(DiagonalSpec::Rates(entries(rates)?.iter().map(Scalar::to_f64).collect()))
            }
            FamilyConfig::DiagonalBase { base } => FamilyKind::Diagonal(DiagonalSpec::Base(entries(base)?)),
            FamilyConfig::Power { matrix: m } => FamilyKind::Power(matrix(m, arithmetic)?),
            FamilyConfig::PowerMinusIdentity { matrix: m } => FamilyKind::PowerMinusIdentity(matrix(m, arithmetic)?),
            FamilyConfig::ScaledPower { lambda, base } => {
                FamilyKind::ScaledPower { lambda: *lambda, base: exact_matrix(base)? }
            }
            FamilyConfig::Jordan { blocks } => FamilyKind::Jordan(
                blocks
                    .iter()
                    .map(|b| {
                        let lambda = b.lambda.to_rational().ok_or_else(|| format!("unreadable eigenvalue {:?}", b.lambda))?;
                        Ok(JordanBlock { lambda, size: b.size })
                    })
                    .collect::<Result<_, String>>()?,
            ),
            FamilyConfig::ExplicitList { matrices } => {
                FamilyKind::ExplicitList(matrices.iter().map(|m| matrix(m, arithmetic)).collect::<Result<_, _>>()?)
            }
        };
        MatrixFamily::new(kind, expanding).map_err(|e| e.to_string())
    }

    /// Exact diagonal rates, when the family is a rate-diagonal one.
    pub fn exact_rates(&self) -> Option<Vec<Rational>> {
        match self {
            FamilyConfig::DiagonalRates { rates } => entries(rates).ok(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAG: &str = r#"{
  "schema": 1,
  "family": {"kind": "diagonal_rates", "rates": [1, 2]},
  "psi": {"kind": "exponential", "tau": 1.0},
  "n_range": [1, 20]
}"#;

    #[test]
    fn parses_defaults() {
        let c = RunConfig::parse(DIAG).unwrap();
        assert_eq!(c.mode, Mode::Numeric);
        assert_eq!(c.arithmetic, Arithmetic::Rational);
        assert_eq!(c.family().unwrap().d, 2);
    }

    #[test]
    fn decimal_entries_are_exact() {
        let e = Entry::Number(0.1);
        assert_eq!(e.to_rational().unwrap(), Rational::new(1.into(), 10.into()));
        assert_eq!(Entry::Text("3/2".into()).to_rational().unwrap(), Rational::new(3.into(), 2.into()));
    }

    #[test]
    fn rejects_increasing_psi_table_with_line() {
        let src = DIAG.replace(
            r#"{"kind": "exponential", "tau": 1.0}"#,
            "{\"kind\": \"table\",\n \"values\": [0.5, 0.25, 0.3]}",
        );
        let e = RunConfig::parse(&src).unwrap_err();
        assert!(e.to_string().contains("psi must be nonincreasing"), "{e}");
        assert_eq!(e.line, Some(5));
    }

    #[test]
    fn rejects_bad_ranges_and_grids() {
        let e = RunConfig::parse(&DIAG.replace("[1, 20]", "[5, 2]")).unwrap_err();
        assert_eq!(e.field, "n_range");
        let src = DIAG.replace("\"n_range\"", "\"tau_grid\": [0.5, 0.5],\n  \"n_range\"");
        assert_eq!(RunConfig::parse(&src).unwrap_err().field, "tau_grid");
        let src = DIAG.replace("\"schema\": 1", "\"schema\": 2");
        assert_eq!(RunConfig::parse(&src).unwrap_err().field, "schema");
        let e = RunConfig::parse("{\"schema\": 1,\n \"bogus\": 3}").unwrap_err();
        assert!(e.line.is_some());
    }
}
