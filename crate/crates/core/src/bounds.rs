use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The rectangular parameter space: per-coordinate intervals `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    /// Build a parameter box, checking that every interval is finite and non-empty.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "lower has length {}, upper has length {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(Error::InvalidBounds("parameter space has dimension 0".into()));
        }
        for i in 0..lower.len() {
            if !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(Error::InvalidBounds(format!("coordinate {i} has non-finite endpoints")));
            }
            if lower[i] >= upper[i] {
                return Err(Error::InvalidBounds(format!(
                    "coordinate {i}: lower bound {} is not below upper bound {}",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&t, (&l, &u))| t >= l && t <= u)
    }

    /// Clamp every coordinate into its interval.
    pub fn clamp(&self, theta: &mut [f64]) {
        for (t, (&l, &u)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *t = t.clamp(l, u);
        }
    }

    /// Squared interval widths `(upper_i - lower_i)^2`, the diagonal of the
    /// scaling matrix used for parameter distances in the global phase.
    pub fn squared_ranges(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| (u - l) * (u - l))
            .collect()
    }
}
