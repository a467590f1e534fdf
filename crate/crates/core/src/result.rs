use serde::{Deserialize, Serialize};

/// Which phase of the engine produced a trace record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Global,
    Local,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Global => write!(f, "global"),
            Phase::Local => write!(f, "local"),
        }
    }
}

/// One engine iteration. Fields that only exist in the local phase are
/// `None` for global records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: Phase,
    pub iter: usize,
    /// Trust-region radius (local phase).
    pub rho: Option<f64>,
    /// Neighborhood size: elite size in the global phase, local fit size otherwise.
    pub fit_size: Option<usize>,
    /// Outcome of the model-adequacy check; `None` when no candidate was tested.
    pub accepted: Option<bool>,
    /// Convergence quantity of the local phase (squared norm of the
    /// estimating function in its dispersion metric).
    pub g_norm_sq: Option<f64>,
}

/// Final output of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Point estimate.
    pub estimate: Vec<f64>,
    /// Estimated covariance of the estimate, row-major.
    pub covariance: Vec<Vec<f64>>,
    /// Square roots of the covariance diagonal.
    pub std_errors: Vec<f64>,
    /// Total number of model simulations performed (the archive size).
    pub n_simulations: usize,
    /// Overidentification test statistic.
    pub sh_stat: f64,
    /// Its degrees of freedom (statistics minus parameters).
    pub sh_df: usize,
    /// Its p-value; `None` when the model is exactly identified.
    pub sh_pvalue: Option<f64>,
    /// Standardized residuals of the individual summary statistics.
    pub std_scores: Vec<f64>,
    /// Per-iteration history.
    pub trace: Vec<TraceRecord>,
}

/// What is known when a phase fails to converge within its iteration cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFit {
    pub phase: Phase,
    /// Best parameter vector seen so far.
    pub best_theta: Vec<f64>,
    pub n_simulations: usize,
    pub trace: Vec<TraceRecord>,
}
