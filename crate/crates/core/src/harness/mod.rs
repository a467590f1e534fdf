//! Full-pipeline fitting and the Monte Carlo evaluation harness.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::global::run_global;
use crate::local::run_local;
use crate::models::BenchmarkModel;
use crate::result::FitResult;
use crate::sampling::RngStream;
use crate::simulator::Simulator;

mod persist;
mod report;

pub use persist::{load_fit_result, write_json, write_scores_csv, write_trace_csv};
pub use report::{anova_within_total_ratio, BenchmarkReport, McErrorReport, SeSummary};

/// Stream-id namespaces for the harness layer.
mod tags {
    pub const ENGINE: u64 = 0x0E51;
    pub const BENCH: u64 = 0x0B0B;
    pub const MCERR: u64 = 0x0ACE;
    pub const DATASET: u64 = 0;
    pub const ENGINE_SEED: u64 = 1;
}

/// Bound the global worker pool by the `IFIT_THREADS` environment variable
/// (0 or unset: automatic). Safe to call more than once; later calls are
/// no-ops once a pool exists.
pub fn configure_threads_from_env() {
    if let Ok(text) = std::env::var("IFIT_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Fit a simulator to an observed summary vector: global search, then local
/// refinement, returning the estimate with covariance, diagnostics, and the
/// full iteration trace.
pub fn fit(sim: &dyn Simulator, t_obs: &[f64], cfg: &Config) -> Result<FitResult> {
    cfg.validate()?;
    if t_obs.len() != sim.dim_stat() {
        return Err(Error::InvalidInput(format!(
            "observed summary has length {}, model produces {}",
            t_obs.len(),
            sim.dim_stat()
        )));
    }
    if cfg.n_elite <= sim.dim_theta() + 1 {
        return Err(Error::InvalidConfig(format!(
            "n_elite = {} cannot support a local fit in {} parameters",
            cfg.n_elite,
            sim.dim_theta()
        )));
    }
    let engine = RngStream::new(cfg.seed, tags::ENGINE);
    let observed = DVector::from_column_slice(t_obs);
    let global = run_global(sim, &observed, cfg, &engine)?;
    run_local(global, sim, cfg, &engine)
}

struct RepOutcome {
    estimate: Vec<f64>,
    std_errors: Vec<f64>,
    n_simulations: usize,
}

fn run_one_replication(
    model: &dyn BenchmarkModel,
    cfg: &Config,
    master_seed: u64,
    namespace: u64,
    rep: u64,
    engine_variant: u64,
) -> std::result::Result<RepOutcome, (String, Option<usize>)> {
    let base = RngStream::new(master_seed, namespace).derive(rep);
    let mut dataset_rng = base.derive(tags::DATASET);
    let (sim, t_obs) = model
        .generate(&mut dataset_rng)
        .map_err(|e| (e.to_string(), None))?;
    let mut rep_cfg = cfg.clone();
    rep_cfg.seed = base.derive(tags::ENGINE_SEED).derive(engine_variant).raw_id();
    match fit(sim.as_ref(), &t_obs, &rep_cfg) {
        Ok(result) => Ok(RepOutcome {
            estimate: result.estimate,
            std_errors: result.std_errors,
            n_simulations: result.n_simulations,
        }),
        Err(Error::NonConvergence { iterations, partial, phase }) => Err((
            format!("{phase} phase hit its {iterations}-iteration cap"),
            Some(partial.n_simulations),
        )),
        Err(e) => Err((e.to_string(), None)),
    }
}

fn sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64)
        .sqrt()
}

/// Benchmark a model over `b` independent synthetic datasets. Replications
/// run in parallel on derived streams, so the report is identical for a
/// fixed `master_seed` regardless of the worker-pool size.
pub fn benchmark(
    model: &dyn BenchmarkModel,
    b: usize,
    cfg: &Config,
    master_seed: u64,
) -> Result<BenchmarkReport> {
    if b == 0 {
        return Err(Error::InvalidInput("benchmark needs at least one replication".into()));
    }
    let theta_true = model.theta_true();
    let p = theta_true.len();

    let outcomes: Vec<std::result::Result<RepOutcome, (String, Option<usize>)>> = (0..b as u64)
        .into_par_iter()
        .map(|j| run_one_replication(model, cfg, master_seed, tags::BENCH, j, 0))
        .collect();

    let mut estimates = Vec::new();
    let mut reported_ses = Vec::new();
    let mut sim_counts = Vec::new();
    let mut failure_reasons = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(rep) => {
                sim_counts.push(rep.n_simulations);
                estimates.push(rep.estimate);
                reported_ses.push(rep.std_errors);
            }
            Err((reason, n_sims)) => {
                if let Some(n) = n_sims {
                    sim_counts.push(n);
                }
                failure_reasons.push(reason);
            }
        }
    }

    let successes = estimates.len();
    let failures = b - successes;
    let ams = if sim_counts.is_empty() {
        0.0
    } else {
        sim_counts.iter().sum::<usize>() as f64 / sim_counts.len() as f64
    };
    let aare = if successes == 0 {
        f64::NAN
    } else {
        estimates
            .iter()
            .map(|est| {
                est.iter()
                    .zip(&theta_true)
                    .map(|(e, t)| ((e - t) / t).abs())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / (p * successes) as f64
    };

    let per_parameter = (0..p)
        .map(|i| {
            let ests: Vec<f64> = estimates.iter().map(|e| e[i]).collect();
            let ses: Vec<f64> = reported_ses.iter().map(|s| s[i]).collect();
            SeSummary {
                se: sd(&ests),
                ave_se: if ses.is_empty() {
                    f64::NAN
                } else {
                    ses.iter().sum::<f64>() / ses.len() as f64
                },
                sd_se: sd(&ses),
            }
        })
        .collect();

    Ok(BenchmarkReport {
        model: model.name().to_string(),
        replications: b,
        successes,
        failures,
        excessive_failures: failures * 20 > b,
        failure_reasons,
        ams,
        aare,
        per_parameter,
        estimates,
        reported_ses,
    })
}

/// Repeat-fit study of engine randomness: `g` datasets, each fitted `r`
/// times on distinct engine streams, decomposed per parameter into
/// within-dataset over total sums of squares.
pub fn mc_error_study(
    model: &dyn BenchmarkModel,
    g: usize,
    r: usize,
    cfg: &Config,
    seed: u64,
) -> Result<McErrorReport> {
    if g < 2 || r < 2 {
        return Err(Error::InvalidInput(
            "engine-error study needs at least 2 datasets and 2 repeats".into(),
        ));
    }
    let p = model.theta_true().len();

    type Cell = (usize, std::result::Result<RepOutcome, (String, Option<usize>)>);
    let cells: Vec<Cell> = (0..g)
        .flat_map(|gi| (0..r).map(move |ri| (gi, ri)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(gi, ri)| {
            // The dataset stream depends only on the dataset index; the
            // engine stream varies with the repeat index.
            let outcome =
                run_one_replication(model, cfg, seed, tags::MCERR, gi as u64, 1 + ri as u64);
            (gi, outcome)
        })
        .collect();

    let mut failures = 0;
    let mut groups: Vec<Vec<Vec<f64>>> = vec![Vec::new(); g];
    for (gi, outcome) in cells {
        match outcome {
            Ok(rep) => groups[gi].push(rep.estimate),
            Err(_) => failures += 1,
        }
    }

    let ratios = (0..p)
        .map(|i| {
            let per_group: Vec<Vec<f64>> = groups
                .iter()
                .map(|grp| grp.iter().map(|est| est[i]).collect())
                .collect();
            anova_within_total_ratio(&per_group)
        })
        .collect();

    Ok(McErrorReport {
        model: model.name().to_string(),
        datasets: g,
        repeats: r,
        ratios,
        failures,
    })
}
