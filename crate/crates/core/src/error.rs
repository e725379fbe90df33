use thiserror::Error;

use crate::structure::StructureSignature;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("minimal index search did not converge by k = {k_max} ({found} of {expected} indices found); singular values near the cutoff: {gap}")]
    NotConverged {
        k_max: usize,
        found: usize,
        expected: usize,
        gap: String,
    },

    #[error("inconsistent rank decisions ({what}); singular values near the cutoff: {gap}")]
    NonMonotone { what: String, gap: String },

    #[error("index-sum balance violated: residual {residual} (rank*grade minus index sum)")]
    BalanceViolation {
        residual: i64,
        signature: Box<StructureSignature>,
    },

    #[error("recovery pivot is numerically singular: {0}")]
    PivotSingular(String),

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("realization failed after {attempts} draws: {detail}")]
    RealizationFailed {
        attempts: usize,
        detail: String,
        last: Option<Box<StructureSignature>>,
    },

    #[error("internal mismatch: {0}")]
    Internal(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that come from tolerance-based rank decisions rather
    /// than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::NonMonotone { .. }
                | Error::BalanceViolation { .. }
                | Error::PivotSingular(_)
                | Error::Eigen(_)
                | Error::RealizationFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
