use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exposure entry {index} is not strictly positive ({value})")]
    NonPositiveExposure { index: usize, value: f64 },

    #[error("portfolio risk {0} is not positive; the risk-budgeting problem is unbounded")]
    Unbounded(f64),

    #[error("matrix is not positive semi-definite (pivot {pivot} = {value})")]
    NotPositiveSemiDefinite { pivot: usize, value: f64 },

    #[error("distortion weights integrate to {0}, expected 1")]
    BadDistortionMass(f64),

    #[error("numerical overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
