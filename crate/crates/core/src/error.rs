use thiserror::Error;

use crate::homogeneous::RitzPair;
use crate::trace::IterateTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("linear solve did not reach relative residual {tol:e} in {iters} iterations (residual {residual:e}); check mu and ell1")]
    NonConvergence { iters: usize, residual: f64, tol: f64 },

    #[error("dimension {n} exceeds the dense threshold {limit}")]
    DimensionTooLarge { n: usize, limit: usize },

    #[error("dense eigensolver failed: {0}")]
    EigensolverFailure(String),

    #[error("Lanczos did not certify the Ritz pair within {iters} iterations")]
    MaxItersExceeded { iters: usize, best: Box<RitzPair> },

    #[error("iterate norm {norm:e} exceeded the overflow guard; step size or concavity is wrong")]
    NumericalOverflow { norm: f64 },

    #[error("zero search direction at a non-terminal iteration")]
    ZeroDirection,

    #[error("outer iteration budget of {max_outer} exhausted")]
    MaxOuterExceeded {
        max_outer: usize,
        trace: Box<IterateTrace>,
    },

    #[error("safeguard retry budget of {retries} exhausted; B_g may be too small")]
    RetryBudgetExceeded { retries: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("problem construction failed: {0}")]
    Construction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("traces describe different problems: {0}")]
    MismatchedProblem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration-class errors map to exit code 2 in the CLI.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::Precondition(_) | Error::MismatchedProblem(_)
        )
    }
}
