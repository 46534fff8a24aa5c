use thiserror::Error;

use crate::picard::PicardTrace;

pub type Result<T> = std::result::Result<T, FgnsError>;

#[derive(Debug, Error)]
pub enum FgnsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("trajectories live on different time meshes")]
    MeshMismatch,

    #[error("time {0} is not a node of the mesh")]
    NotANode(f64),

    #[error("coefficients are not Hermitian-symmetric (relative defect {0:e})")]
    NotHermitian(f64),

    #[error("initial data is not divergence-free (defect {0:e})")]
    NotDivergenceFree(f64),

    #[error("window radius {radius} has r^(2 beta) = {window_time} beyond the horizon {horizon}")]
    WindowBeyondHorizon {
        radius: f64,
        window_time: f64,
        horizon: f64,
    },

    #[error("mollifier radius {epsilon} does not fit the box (needs epsilon < {limit})")]
    MollifierTooLarge { epsilon: f64, limit: f64 },

    #[error("grid with {0} points is too large for this operation")]
    GridTooLarge(usize),

    #[error("time mesh does not resolve t -> 0 (smallest positive node {0:e} > 1e-3)")]
    MeshTooCoarse(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("smallness condition violated: indicator {indicator} >= 1")]
    SmallnessViolated { indicator: f64 },

    #[error("Lorentz threshold violated: 4 T^(1/p) |u0|_(q,inf) = {indicator} >= 1 (admissible T < {max_horizon})")]
    ThresholdViolated { indicator: f64, max_horizon: f64 },

    #[error("bilinear constant unavailable: no nondegenerate sample")]
    EmptySample,

    #[error("Picard iteration diverged: differences grew for three consecutive steps")]
    Diverged(Box<PicardTrace>),

    #[error("Picard iteration did not reach the stopping tolerance in {} iterations", .0.steps.len())]
    NotConverged(Box<PicardTrace>),

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl FgnsError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        FgnsError::InvalidParameter(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        FgnsError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl FgnsError {
    /// Process exit status: 2 for configuration and input errors, 3 for
    /// invariant violations, 4 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            FgnsError::Diverged(_) | FgnsError::NotConverged(_) => 4,
            FgnsError::NotHermitian(_)
            | FgnsError::NotDivergenceFree(_)
            | FgnsError::NonFinite(_)
            | FgnsError::SmallnessViolated { .. }
            | FgnsError::ThresholdViolated { .. }
            | FgnsError::EmptySample
            | FgnsError::InvariantViolated(_) => 3,
            _ => 2,
        }
    }
}
