//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A calibration root-find could not bracket or converge.
    /// Carries the bracket endpoints and the objective values there.
    #[error("calibration failed: {context} (bracket [{lo}, {hi}] -> [{f_lo}, {f_hi}])")]
    Calibration {
        context: String,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// Parameters drove a computation out of the representable range.
    #[error("out of numerical range: {0}")]
    Range(String),

    /// An internal invariant that should hold by construction was violated.
    #[error("internal consistency violation: {0}")]
    Internal(String),

    /// Generated spectral content does not fit on the frequency grid.
    #[error("spectral support exceeds the grid: {0}")]
    Aliasing(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
