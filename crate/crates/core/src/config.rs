use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the model-adequacy check of the local phase centers its linear
/// prediction: at the candidate point (as the update rule is stated) or at
/// the current iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelCheckCenter {
    Candidate,
    Current,
}

/// Engine constants. The numeric defaults are the recommended settings that
/// are used unchanged across all benchmark models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Size of the initial Latin hypercube sample.
    pub n_init: usize,
    /// Smallest allowed elite-sample size.
    pub n_elite: usize,
    /// Decay rate of the elite-sample size, in (0,1).
    pub a_elite: f64,
    /// Stopping tolerance of the global phase.
    pub tol_global: f64,
    /// Stopping tolerance of the local phase.
    pub tol_local: f64,
    /// Tolerance of the local-model adequacy check.
    pub tol_model: f64,
    /// Target neighborhood size for the local linear fit.
    pub nfit_local: usize,
    /// Simulations added per global iteration.
    pub nadd_global: usize,
    /// Simulations added per local iteration.
    pub nadd_local: usize,
    /// Maximum trust-region radius.
    pub rho_max: f64,
    /// Smoothing weight for the Jacobian and covariance updates, in (0,1].
    pub lambda: f64,
    /// Iteration cap for the global phase; hitting it is a hard error.
    pub max_global_iters: usize,
    /// Iteration cap for the local phase; hitting it is a hard error.
    pub max_local_iters: usize,
    /// Centering of the model-adequacy check.
    pub model_check_center: ModelCheckCenter,
    /// Master seed for all engine randomness.
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            n_init: 1000,
            n_elite: 100,
            a_elite: 0.5,
            tol_global: 0.1,
            tol_local: 1.0,
            tol_model: 1.5,
            nfit_local: 4000,
            nadd_global: 100,
            nadd_local: 10,
            rho_max: 0.1,
            lambda: 0.1,
            max_global_iters: 500,
            max_local_iters: 2000,
            model_check_center: ModelCheckCenter::Candidate,
            seed: 0,
        }
    }
}

impl Config {
    /// Check every invariant, reporting all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_init == 0 {
            problems.push("n_init must be positive".to_string());
        }
        if self.n_elite == 0 {
            problems.push("n_elite must be positive".to_string());
        }
        if self.n_elite > self.n_init {
            problems.push(format!("n_elite exceeds n_init ({} > {})", self.n_elite, self.n_init));
        }
        if !(self.a_elite > 0.0 && self.a_elite < 1.0) {
            problems.push(format!("a_elite must lie in (0,1), got {}", self.a_elite));
        }
        for (name, value) in [
            ("tol_global", self.tol_global),
            ("tol_local", self.tol_local),
            ("tol_model", self.tol_model),
            ("rho_max", self.rho_max),
        ] {
            if !value.is_finite() || value <= 0.0 {
                problems.push(format!("{name} must be a positive real, got {value}"));
            }
        }
        if self.nfit_local < self.n_elite {
            problems.push(format!(
                "nfit_local must be at least n_elite ({} < {})",
                self.nfit_local, self.n_elite
            ));
        }
        if self.nadd_global == 0 {
            problems.push("nadd_global must be positive".to_string());
        }
        if self.nadd_local == 0 {
            problems.push("nadd_local must be positive".to_string());
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            problems.push(format!("lambda must lie in (0,1], got {}", self.lambda));
        }
        if self.max_global_iters == 0 {
            problems.push("max_global_iters must be positive".to_string());
        }
        if self.max_local_iters == 0 {
            problems.push("max_local_iters must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }

    /// Validating constructor used at engine entry points.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }
}
