use alloc::string::String;

/// Errors raised by the core computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("invalid psi: {0}")]
    InvalidPsi(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("analytic mode unsupported: {0}")]
    UnsupportedAnalytic(String),
    #[error("budget of {budget} exceeded{}", lower_bound_note(.lower_bound))]
    BudgetExceeded {
        budget: u64,
        /// Minima proven so far, when the failure happened inside a minima search.
        lower_bound: Option<alloc::vec::Vec<f64>>,
    },
    #[error("coefficient box is too small to contain {needed} independent vectors")]
    InsufficientBox { needed: usize },
    #[error("h profile is required but unset")]
    MissingHProfile,
    #[error("tau_n + l_n,i = {0} is not positive")]
    NonExpandingDenominator(f64),
    #[error("breakpoint must be positive")]
    InvalidBreakpoint,
    #[error("eigenvalue modulus {0} does not exceed 1")]
    NotExpanding(f64),
    #[error("invalid counterexample family: {0}")]
    InvalidCounterexampleFamily(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("M = {m} is below the threshold M0 = {m0}")]
    BelowThreshold { m: f64, m0: f64 },
    #[error("basis condition number {0:e} exceeds the floating-point guard")]
    IllConditioned(f64),
}

fn lower_bound_note(lb: &Option<alloc::vec::Vec<f64>>) -> String {
    match lb {
        Some(v) => alloc::format!(" (minima found so far: {v:?})"),
        None => String::new(),
    }
}

pub type Result<T> = core::result::Result<T, Error>;
