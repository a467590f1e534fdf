//! The four benchmark generative models, each bundling data generation,
//! a summary-statistic map, parameter bounds, and its true parameters.

use std::sync::Arc;

use crate::error::Result;
use crate::sampling::RngStream;
use crate::simulator::Simulator;

pub mod enzyme;
pub mod logit;
pub mod toad;
pub mod trait_model;

pub use enzyme::{gillespie_ssa, EnzymeModel};
pub use logit::LogitModel;
pub use toad::{load_toad_csv, toad_summary, PositionData, ToadModel};
pub use trait_model::TraitModel;

/// A model that can be benchmarked: it knows its true parameters and can
/// generate synthetic datasets, returning a fitting simulator with any
/// dataset context (covariates, missingness) frozen in.
pub trait BenchmarkModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn theta_true(&self) -> Vec<f64>;
    /// Draw one dataset at the true parameters; returns the simulator to fit
    /// with and the observed summary vector.
    fn generate(&self, rng: &mut RngStream) -> Result<(Arc<dyn Simulator>, Vec<f64>)>;
}

/// Look up a benchmark model by its command-line name.
pub fn by_name(name: &str) -> Option<Box<dyn BenchmarkModel>> {
    match name {
        "logit" => Some(Box::new(logit::LogitBenchmark)),
        "enzyme" => Some(Box::new(enzyme::EnzymeBenchmark)),
        "trait" => Some(Box::new(trait_model::TraitBenchmark)),
        "toad" => Some(Box::new(toad::ToadBenchmark)),
        _ => None,
    }
}

/// Quantile levels shared by the trait and toad summaries:
/// 0.01, then 0.05 through 0.95 in steps of 0.05, then 0.99.
pub(crate) fn summary_quantile_levels() -> Vec<f64> {
    let mut levels = vec![0.01];
    for k in 1..=19 {
        levels.push(k as f64 * 0.05);
    }
    levels.push(0.99);
    levels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_one_levels() {
        let levels = summary_quantile_levels();
        assert_eq!(levels.len(), 21);
        assert_eq!(levels[0], 0.01);
        assert!((levels[1] - 0.05).abs() < 1e-12);
        assert!((levels[10] - 0.5).abs() < 1e-12);
        assert!((levels[19] - 0.95).abs() < 1e-12);
        assert_eq!(levels[20], 0.99);
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn registry_knows_all_four() {
        for name in ["logit", "enzyme", "trait", "toad"] {
            assert!(by_name(name).is_some(), "{name}");
        }
        assert!(by_name("nope").is_none());
    }
}
