use nalgebra::DVector;
use rayon::prelude::*;

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::sampling::RngStream;

/// A generative model reduced to its summary statistics: maps a parameter
/// vector and a random stream to the summary of one simulated dataset.
///
/// Implementations must be pure functions of `(theta, stream state)` so that
/// fits are reproducible and batches can run on any thread schedule.
pub trait Simulator: Send + Sync {
    fn dim_theta(&self) -> usize;
    fn dim_stat(&self) -> usize;
    fn bounds(&self) -> &Bounds;
    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>>;
}

/// Run one simulation and validate the output contract: correct length and
/// every entry finite. Violations become model errors carrying `theta`.
pub fn checked_simulate(
    sim: &dyn Simulator,
    theta: &DVector<f64>,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let out = sim
        .simulate(theta.as_slice(), rng)
        .map_err(|e| e.at_theta(theta.as_slice()))?;
    if out.len() != sim.dim_stat() {
        return Err(Error::Model {
            message: format!("summary has length {}, expected {}", out.len(), sim.dim_stat()),
            theta: theta.as_slice().to_vec(),
        });
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model {
            message: "summary contains non-finite entries".into(),
            theta: theta.as_slice().to_vec(),
        });
    }
    Ok(DVector::from_vec(out))
}

/// Redraw budget per archive slot before a simulation failure is fatal.
const REDRAW_ATTEMPTS: usize = 100;

/// Accepted proposals paired with their simulated summaries.
pub type SimulatedBatch = (Vec<DVector<f64>>, Vec<DVector<f64>>);

/// Simulate a batch concurrently, one derived stream per row, keyed by the
/// archive index each result will occupy.
pub fn simulate_batch(
    sim: &dyn Simulator,
    thetas: &[DVector<f64>],
    draw_root: &RngStream,
    first_index: usize,
) -> Result<Vec<DVector<f64>>> {
    thetas
        .par_iter()
        .enumerate()
        .map(|(k, theta)| {
            let mut stream = draw_root.derive((first_index + k) as u64).derive(0);
            checked_simulate(sim, theta, &mut stream)
        })
        .collect()
}

/// Simulate a batch of proposals, replacing any proposal whose simulation
/// fails in a draw-specific way (degenerate summary, non-finite output) with
/// a fresh draw from the same proposal law.
///
/// Parameter regions can exist where the summary statistic is undefined for
/// some or all datasets (nothing to summarize, astronomically heavy tails);
/// exploration must be able to pass through them without killing the fit.
/// The first attempts run concurrently; replacements are drawn sequentially
/// in slot order, so results stay independent of the thread schedule.
/// Returns the accepted proposals and their summaries.
pub fn simulate_batch_with_redraw(
    sim: &dyn Simulator,
    thetas: Vec<DVector<f64>>,
    draw_root: &RngStream,
    first_index: usize,
    proposal_rng: &mut RngStream,
    redraw: &mut dyn FnMut(&mut RngStream) -> DVector<f64>,
) -> Result<SimulatedBatch> {
    let first_pass: Vec<Result<DVector<f64>>> = thetas
        .par_iter()
        .enumerate()
        .map(|(k, theta)| {
            let mut stream = draw_root.derive((first_index + k) as u64).derive(0);
            checked_simulate(sim, theta, &mut stream)
        })
        .collect();

    let mut out_thetas = thetas;
    let mut out_stats = Vec::with_capacity(out_thetas.len());
    for (k, outcome) in first_pass.into_iter().enumerate() {
        match outcome {
            Ok(stat) => out_stats.push(stat),
            Err(mut err) => {
                if !err.is_retryable_simulation() {
                    return Err(err);
                }
                let slot_root = draw_root.derive((first_index + k) as u64);
                let mut resolved = None;
                for attempt in 1..=REDRAW_ATTEMPTS {
                    let theta = redraw(proposal_rng);
                    let mut stream = slot_root.derive(attempt as u64);
                    match checked_simulate(sim, &theta, &mut stream) {
                        Ok(stat) => {
                            resolved = Some((theta, stat));
                            break;
                        }
                        Err(e) if e.is_retryable_simulation() => err = e,
                        Err(e) => return Err(e),
                    }
                }
                match resolved {
                    Some((theta, stat)) => {
                        log::debug!("proposal {k} replaced after a degenerate simulation");
                        out_thetas[k] = theta;
                        out_stats.push(stat);
                    }
                    None => return Err(err),
                }
            }
        }
    }
    Ok((out_thetas, out_stats))
}
