//! Error type shared across the crate.
//!
//! Errors are split into two classes so the CLI can map them onto exit
//! codes: parameter errors (bad arguments, malformed files) exit with 2,
//! numerical failures (rank deficiency, non-convergence, indefinite
//! covariances) exit with 3.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parameter,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or configuration value.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Index outside the addressed dimension.
    #[error("index {index} out of bounds for dimension {len}")]
    IndexOutOfBounds { index: usize, len: usize },

    /// The signal produces no measurement energy, so a finite SNR cannot
    /// be calibrated.
    #[error("degenerate signal: ||Ax||_2 = 0, cannot calibrate noise for a finite SNR")]
    DegenerateSignal,

    /// A normal matrix was singular with ridge_lambda = 0.
    #[error("rank-deficient normal matrix ({0}); retry with ridge_lambda > 0")]
    RankDeficient(String),

    /// A conditional covariance failed the positive-semidefinite check.
    #[error("conditional covariance is not PSD: eigenvalue {eigenvalue:.3e} below tolerance")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    /// An iterative solver hit its iteration cap. Carries the last iterate.
    #[error("iteration limit reached after {iterations} iterations")]
    IterationLimit {
        iterations: usize,
        last_iterate: Vec<f64>,
    },

    /// An operation that needs a nonempty support was given an empty one.
    #[error("empty support: {0}")]
    EmptySupport(String),

    /// Eigenvalue iteration failed to converge (pathological input).
    #[error("eigenvalue iteration failed to converge at index {0}")]
    EigenNonConvergence(usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parameter(_)
            | Error::IndexOutOfBounds { .. }
            | Error::EmptySupport(_)
            | Error::Io(_)
            | Error::Parse(_) => ErrorClass::Parameter,
            Error::DegenerateSignal
            | Error::RankDeficient(_)
            | Error::NotPositiveSemidefinite { .. }
            | Error::IterationLimit { .. }
            | Error::EigenNonConvergence(_) => ErrorClass::Numerical,
        }
    }

    /// CLI exit code: 2 for parameter errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Parameter => 2,
            ErrorClass::Numerical => 3,
        }
    }
}
