use thiserror::Error;

use crate::wellsolver::ThresholdResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("mean-free requirement violated: zero mode {zero_mode:e} exceeds {tolerance:e}")]
    NotMeanFree { zero_mode: f64, tolerance: f64 },

    #[error("gamma outside coercive range: gamma^2 = {gamma_sq} >= c1^2 = {c1_sq}")]
    GammaOutOfRange { gamma_sq: f64, c1_sq: f64 },

    #[error("empty sample list")]
    EmptySamples,

    #[error("zero field where a nonzero field is required")]
    ZeroField,

    #[error("minimization did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Box<ThresholdResult>,
    },

    #[error("field file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
