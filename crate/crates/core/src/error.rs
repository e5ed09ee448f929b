use thiserror::Error;

use crate::bregman::FenchelEstimate;
use crate::projection::ProjectionResult;

/// Errors raised by the algebra, divergence and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("not Hermitian (relative asymmetry {0:.3e})")]
    NonHermitian(f64),

    #[error("not positive semi-definite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("gamma {0} outside the admissible range {1}")]
    GammaOutOfRange(f64, &'static str),

    #[error("gamma mismatch: expected {expected}, got {actual}")]
    GammaMismatch { expected: f64, actual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constraint set is infeasible: {0}")]
    Infeasible(String),

    #[error("Fenchel ascent hit the iteration limit (gradient residual {:.3e})", .0.gradient_residual)]
    FenchelMaxIterations(FenchelEstimate),

    #[error("projection solver hit the iteration limit (kkt residual {:.3e})", .0.kkt_residual)]
    ProjectionMaxIterations(Box<ProjectionResult>),

    #[error("no feasible samples found after {0} attempts")]
    SamplingFailed(usize),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
