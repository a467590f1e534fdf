//! Toad movement model: heavy-tailed nightly displacements with a
//! probabilistic return to previously used refuge sites, summarized by
//! return frequencies and quantile profiles of log displacement distances
//! at several day lags.

use std::path::Path;
use std::sync::Arc;

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::mathkit::stats::{median, quantile};
use crate::models::{summary_quantile_levels, BenchmarkModel};
use crate::sampling::{alpha_stable, RngStream};
use crate::simulator::Simulator;

const N_TOADS: usize = 66;
const N_DAYS: usize = 63;
const LAGS: [usize; 4] = [1, 2, 4, 8];
const RETURN_THRESHOLD_M: f64 = 10.0;

/// A toads-by-days matrix of daily refuge positions with a missingness mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionData {
    pub n_toads: usize,
    pub n_days: usize,
    values: Vec<f64>,
    observed: Vec<bool>,
}

impl PositionData {
    pub fn new_fully_observed(n_toads: usize, n_days: usize) -> Self {
        Self {
            n_toads,
            n_days,
            values: vec![0.0; n_toads * n_days],
            observed: vec![true; n_toads * n_days],
        }
    }

    pub fn new_missing(n_toads: usize, n_days: usize) -> Self {
        Self {
            n_toads,
            n_days,
            values: vec![0.0; n_toads * n_days],
            observed: vec![false; n_toads * n_days],
        }
    }

    pub fn set(&mut self, toad: usize, day: usize, value: f64) {
        let idx = toad * self.n_days + day;
        self.values[idx] = value;
        self.observed[idx] = true;
    }

    pub fn clear(&mut self, toad: usize, day: usize) {
        self.observed[toad * self.n_days + day] = false;
    }

    pub fn get(&self, toad: usize, day: usize) -> Option<f64> {
        let idx = toad * self.n_days + day;
        self.observed[idx].then(|| self.values[idx])
    }

    pub fn is_observed(&self, toad: usize, day: usize) -> bool {
        self.observed[toad * self.n_days + day]
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }
}

/// Simulate daily refuge positions for every toad. Each toad starts at the
/// origin refuge; each night it forages a stable-distributed displacement
/// from its current refuge, then either returns to a uniformly chosen
/// previous refuge day (probability `pi`) or settles where it is.
pub fn simulate_positions(
    theta: &[f64],
    n_toads: usize,
    n_days: usize,
    rng: &mut RngStream,
) -> Vec<Vec<f64>> {
    let (alpha, gamma, pi) = (theta[0], theta[1], theta[2]);
    let mut all = Vec::with_capacity(n_toads);
    for _ in 0..n_toads {
        let mut history = Vec::with_capacity(n_days + 1);
        history.push(0.0);
        let mut row = Vec::with_capacity(n_days);
        for _ in 0..n_days {
            let position = history.last().unwrap() + alpha_stable(alpha, gamma, rng);
            let refuge = if rng.uniform() < pi {
                history[rng.index(history.len())]
            } else {
                position
            };
            history.push(refuge);
            row.push(refuge);
        }
        all.push(row);
    }
    all
}

/// The 88-dimensional summary: for each lag in {1, 2, 4, 8}, the return
/// frequency (displacement under 10 m), the median log non-return distance,
/// and the twenty adjacent differences of its twenty-one quantiles.
pub fn toad_summary(data: &PositionData) -> Result<Vec<f64>> {
    let levels = summary_quantile_levels();
    let mut out = Vec::with_capacity(4 * (2 + levels.len() - 1));
    for &lag in &LAGS {
        let mut returns = 0usize;
        let mut total = 0usize;
        let mut log_non_returns = Vec::new();
        for toad in 0..data.n_toads {
            for day in 0..data.n_days.saturating_sub(lag) {
                let (Some(a), Some(b)) = (data.get(toad, day), data.get(toad, day + lag)) else {
                    continue;
                };
                let dist = (b - a).abs();
                total += 1;
                if dist < RETURN_THRESHOLD_M {
                    returns += 1;
                } else {
                    log_non_returns.push(dist.ln());
                }
            }
        }
        if total == 0 {
            return Err(Error::DegenerateData(format!(
                "lag {lag}: no observed displacement pairs"
            )));
        }
        if log_non_returns.is_empty() {
            return Err(Error::DegenerateData(format!(
                "lag {lag}: no non-return displacements"
            )));
        }
        out.push(returns as f64 / total as f64);
        out.push(median(&log_non_returns)?);
        let qs = quantile(&log_non_returns, &levels)?;
        for w in qs.windows(2) {
            out.push(w[1] - w[0]);
        }
    }
    Ok(out)
}

/// Load a `toad_id,day,position` CSV into a position matrix. Both ids are
/// one-based; an empty position field marks a missing observation. The
/// matrix dimensions are inferred from the largest ids seen.
pub fn load_toad_csv(path: impl AsRef<Path>) -> Result<PositionData> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == "toad_id,day,position" => {}
        Some((_, header)) => {
            return Err(Error::InvalidInput(format!(
                "expected header 'toad_id,day,position', got '{header}'"
            )))
        }
        None => return Err(Error::InvalidInput("empty file".into())),
    }

    let mut cells: Vec<(usize, usize, Option<f64>)> = Vec::new();
    let mut max_toad = 0usize;
    let mut max_day = 0usize;
    for (lineno, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "line {}: expected 3 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let toad: usize = fields[0].trim().parse().map_err(|_| {
            Error::InvalidInput(format!("line {}: bad toad id '{}'", lineno + 1, fields[0]))
        })?;
        let day: usize = fields[1].trim().parse().map_err(|_| {
            Error::InvalidInput(format!("line {}: bad day '{}'", lineno + 1, fields[1]))
        })?;
        if toad == 0 || day == 0 {
            return Err(Error::InvalidInput(format!("line {}: ids are one-based", lineno + 1)));
        }
        let position = if fields[2].trim().is_empty() {
            None
        } else {
            Some(fields[2].trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!(
                    "line {}: non-numeric position '{}'",
                    lineno + 1,
                    fields[2]
                ))
            })?)
        };
        max_toad = max_toad.max(toad);
        max_day = max_day.max(day);
        cells.push((toad - 1, day - 1, position));
    }
    if cells.is_empty() {
        return Err(Error::InvalidInput("no data rows".into()));
    }

    let mut data = PositionData::new_missing(max_toad, max_day);
    let mut seen = vec![false; max_toad * max_day];
    for (toad, day, position) in cells {
        let idx = toad * max_day + day;
        if seen[idx] {
            return Err(Error::InvalidInput(format!(
                "duplicate entry for toad {} day {}",
                toad + 1,
                day + 1
            )));
        }
        seen[idx] = true;
        if let Some(v) = position {
            data.set(toad, day, v);
        }
    }
    Ok(data)
}

pub struct ToadModel {
    bounds: Bounds,
    n_toads: usize,
    n_days: usize,
    mask: Option<PositionData>,
}

impl ToadModel {
    pub fn new() -> Self {
        Self {
            bounds: Bounds::new(vec![0.01, 0.0, 0.0], vec![2.0, 100.0, 1.0]).unwrap(),
            n_toads: N_TOADS,
            n_days: N_DAYS,
            mask: None,
        }
    }

    pub fn theta_true() -> Vec<f64> {
        vec![1.7, 35.0, 0.6]
    }

    /// Use the missingness pattern (and dimensions) of a real dataset:
    /// simulated positions are masked identically before summarization.
    pub fn with_mask(mask: PositionData) -> Self {
        Self {
            bounds: Bounds::new(vec![0.01, 0.0, 0.0], vec![2.0, 100.0, 1.0]).unwrap(),
            n_toads: mask.n_toads,
            n_days: mask.n_days,
            mask: Some(mask),
        }
    }
}

impl Default for ToadModel {
    fn default() -> Self {
        Self::new()
    }
}

impl Simulator for ToadModel {
    fn dim_theta(&self) -> usize {
        3
    }

    fn dim_stat(&self) -> usize {
        88
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        let positions = simulate_positions(theta, self.n_toads, self.n_days, rng);
        let mut data = PositionData::new_fully_observed(self.n_toads, self.n_days);
        for (toad, row) in positions.iter().enumerate() {
            for (day, &v) in row.iter().enumerate() {
                data.values[toad * self.n_days + day] = v;
            }
        }
        if let Some(mask) = &self.mask {
            for toad in 0..self.n_toads {
                for day in 0..self.n_days {
                    if !mask.is_observed(toad, day) {
                        data.clear(toad, day);
                    }
                }
            }
        }
        toad_summary(&data)
    }
}

pub struct ToadBenchmark;

impl BenchmarkModel for ToadBenchmark {
    fn name(&self) -> &'static str {
        "toad"
    }

    fn theta_true(&self) -> Vec<f64> {
        ToadModel::theta_true()
    }

    fn generate(&self, rng: &mut RngStream) -> Result<(Arc<dyn Simulator>, Vec<f64>)> {
        let model = ToadModel::new();
        let t_obs = model.simulate(&ToadModel::theta_true(), rng)?;
        Ok((Arc::new(model), t_obs))
    }
}
