use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("radius {r} outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },

    #[error(
        "quadrature did not converge: estimate {value} with error {error} after {panels} panels"
    )]
    QuadratureNonConvergence {
        value: f64,
        error: f64,
        panels: usize,
    },

    #[error("ODE integration failed at r = {at}: {reason}")]
    Integration { at: f64, reason: String },

    #[error("Wronskian drifted from 1 by {deviation:e} at r = {at}")]
    WronskianDrift { deviation: f64, at: f64 },

    #[error("source term is not integrable: r^4 |g| grows like r^{slope:.2} in the tail")]
    NonIntegrableSource { slope: f64 },

    #[error("a posteriori residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("{what}: routes disagree by {deviation:e} (tolerance {tolerance:e})")]
    CrossValidation {
        what: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("no eigenvalue bracket for index {index} in [{lo}, {hi}]")]
    BracketNotFound { index: usize, lo: f64, hi: f64 },

    #[error("zero count mismatch: expected {expected}, found {found}")]
    ZeroCountMismatch { expected: usize, found: usize },

    #[error("sign change in ground-state eigenfunction near r = {at}")]
    SignChange { at: f64 },

    #[error("time outside the admissible window: {0}")]
    TimeWindow(String),

    #[error("initial data not resolved by the grid: relative interpolation error {0:e}")]
    NotResolved(f64),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("derivative unavailable for {0}")]
    MissingDerivative(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
