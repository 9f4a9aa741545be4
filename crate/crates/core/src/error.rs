use thiserror::Error;

use crate::pdcore::SymMatrix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no feasible interval: {0}")]
    NoInterval(String),

    #[error("singular configuration: {0}")]
    Singularity(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("truncated sampling failed: {0}")]
    Sampling(String),

    /// The solver hit its iteration cap. Carries the best iterate found.
    #[error("solver did not converge after {iterations} iterations (duality gap {gap:.3e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        best: Box<SymMatrix>,
    },

    #[error("group cannot be split: {0}")]
    NotSplittable(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate (zero-variance) columns: {}", .0.join(", "))]
    DegenerateColumns(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::NoInterval(_)
                | Error::Singularity(_)
                | Error::EstimationFailed(_)
                | Error::Sampling(_)
                | Error::NotConverged { .. }
                | Error::Invariant(_)
        )
    }
}
