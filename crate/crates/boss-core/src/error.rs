//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix columns are not orthonormal (deviation {deviation:.3e})")]
    InvalidBasis { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("rank-deficient input: smallest singular value {sigma_min:.3e}")]
    DegenerateProjection { sigma_min: f64 },

    #[error(
        "cover too large for exact enumeration: cardinality bound \
         (4 m sqrt(d) / eps)^(d m) = {bound:.3e}, grid points = {grid_points:.3e}, \
         cap = {cap}"
    )]
    CoverTooLarge { bound: f64, grid_points: f64, cap: usize },

    #[error("invalid action-set matrix: {reason}")]
    InvalidActionSet { reason: String },

    #[error("zero target has no maximizer over the action set")]
    UndefinedMaximizer,

    #[error("action outside the action set: quadratic form {quad_form:.6} > 1")]
    ActionOutsideSet { quad_form: f64 },

    #[error("invalid configuration:\n  {}", violations.join("\n  "))]
    InvalidConfig { violations: Vec<String> },

    #[error("failed to parse config: {0}")]
    ConfigParse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Single-violation configuration error.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig {
            violations: vec![msg.into()],
        }
    }

    /// True for errors a caller caused by handing in bad inputs, as opposed
    /// to failures encountered while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. }
                | Error::ConfigParse(_)
                | Error::InvalidBasis { .. }
                | Error::DimensionMismatch { .. }
                | Error::CoverTooLarge { .. }
                | Error::InvalidActionSet { .. }
        )
    }
}
