use serde::{Deserialize, Serialize};

/// Per-parameter standard-error calibration summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeSummary {
    /// Empirical standard deviation of the estimates.
    pub se: f64,
    /// Mean of the reported standard errors.
    pub ave_se: f64,
    /// Standard deviation of the reported standard errors.
    pub sd_se: f64,
}

/// Aggregate of a Monte Carlo benchmark over replicated synthetic datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub model: String,
    /// Requested replication count.
    pub replications: usize,
    pub successes: usize,
    pub failures: usize,
    pub failure_reasons: Vec<String>,
    /// Flag raised when more than 5% of replications failed.
    pub excessive_failures: bool,
    /// Mean simulations per fit, over replications with a known count.
    pub ams: f64,
    /// Mean absolute relative estimation error over successful replications.
    pub aare: f64,
    pub per_parameter: Vec<SeSummary>,
    /// Point estimates of every successful replication, row per replication.
    pub estimates: Vec<Vec<f64>>,
    /// Reported standard errors of every successful replication.
    pub reported_ses: Vec<Vec<f64>>,
}

/// Share of estimator variability attributable to engine randomness, per
/// parameter: within-group over total sum of squares across repeated fits
/// of the same datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McErrorReport {
    pub model: String,
    pub datasets: usize,
    pub repeats: usize,
    pub ratios: Vec<f64>,
    pub failures: usize,
}

/// One-way decomposition: `SS_within / SS_total` over groups of values.
/// Empty groups are skipped; a zero total sum of squares yields zero.
pub fn anova_within_total_ratio(groups: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    if all.is_empty() {
        return 0.0;
    }
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let ss_total: f64 = all.iter().map(|x| (x - grand) * (x - grand)).sum();
    if ss_total <= 0.0 {
        return 0.0;
    }
    let mut ss_within = 0.0;
    for group in groups {
        if group.is_empty() {
            continue;
        }
        let mean = group.iter().sum::<f64>() / group.len() as f64;
        ss_within += group.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    }
    ss_within / ss_total
}
