use thiserror::Error;

use crate::result::{Phase, PartialFit};

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the fitting engine and its numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("summary statistic {index} is degenerate: {reason}")]
    DegenerateStatistic { index: usize, reason: String },

    /// A dataset (real or simulated) cannot support the requested summary.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("matrix not positive definite in {context}, ridge escalation exhausted")]
    SingularMatrix { context: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model simulation failed at theta {theta:?}: {message}")]
    Model { message: String, theta: Vec<f64> },

    #[error("subprocess protocol error: {0}")]
    Protocol(String),

    #[error("{} search did not converge within {iterations} iterations", .phase)]
    NonConvergence {
        phase: Phase,
        iterations: usize,
        partial: Box<PartialFit>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach the offending parameter vector to a model-side failure.
    pub fn at_theta(self, theta: &[f64]) -> Error {
        match self {
            Error::Model { message, .. } => Error::Model { message, theta: theta.to_vec() },
            Error::DegenerateData(message) => {
                Error::DegenerateData(format!("{message} (at theta {theta:?})"))
            }
            other => other,
        }
    }

    /// Whether the failure is tied to one simulated draw rather than to the
    /// model as such: the engine may discard the proposal and redraw.
    pub fn is_retryable_simulation(&self) -> bool {
        matches!(self, Error::Model { .. } | Error::DegenerateData(_))
    }
}
