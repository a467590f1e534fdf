//! Stochastic enzyme kinetics: substrate binding, unbinding, and catalysis
//! simulated exactly event by event, summarized by B-spline coefficients of
//! the complex and product trajectories.

use std::sync::Arc;

use crate::bounds::Bounds;
use crate::error::Result;
use crate::mathkit::bspline::bspline_ls;
use crate::models::BenchmarkModel;
use crate::sampling::RngStream;
use crate::simulator::Simulator;

const INIT_STATE: [i64; 4] = [100, 100, 0, 0]; // (E, S, C, P)
const N_GRID: usize = 50;

/// Exact stochastic simulation of the reaction system
/// `E + S -> C`, `C -> E + S`, `C -> P + E` with mass-action propensities
/// `k1*E*S`, `k2*C`, `k3*C`. Returns the state at each grid time; the
/// last-event state holds between jumps, and an absorbing state holds to
/// the horizon.
pub fn gillespie_ssa(
    rates: &[f64; 3],
    init_state: [i64; 4],
    grid: &[f64],
    rng: &mut RngStream,
) -> Vec<[i64; 4]> {
    debug_assert!(rates.iter().all(|&r| r >= 0.0));
    let mut state = init_state;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    let mut next_grid = 0;

    loop {
        let (e, s, c, _p) = (state[0], state[1], state[2], state[3]);
        let a1 = rates[0] * e as f64 * s as f64;
        let a2 = rates[1] * c as f64;
        let a3 = rates[2] * c as f64;
        let total = a1 + a2 + a3;

        if total <= 0.0 {
            // Absorbing: the current state holds forever.
            while next_grid < grid.len() {
                out.push(state);
                next_grid += 1;
            }
            return out;
        }

        let dt = -rng.uniform_open().ln() / total;
        let t_next = t + dt;
        while next_grid < grid.len() && grid[next_grid] < t_next {
            out.push(state);
            next_grid += 1;
        }
        if next_grid == grid.len() {
            return out;
        }

        let pick = rng.uniform() * total;
        if pick < a1 {
            state[0] -= 1;
            state[1] -= 1;
            state[2] += 1;
        } else if pick < a1 + a2 {
            state[0] += 1;
            state[1] += 1;
            state[2] -= 1;
        } else {
            state[2] -= 1;
            state[3] += 1;
            state[0] += 1;
        }
        t = t_next;
    }
}

pub struct EnzymeModel {
    bounds: Bounds,
    grid: Vec<f64>,
}

impl EnzymeModel {
    pub fn new() -> Self {
        Self {
            bounds: Bounds::new(vec![0.0; 3], vec![50.0; 3]).unwrap(),
            // The state at time zero is deterministic, so the grid starts
            // after it: t_j = j / 50 for j = 1..=50.
            grid: (1..=N_GRID).map(|j| j as f64 / N_GRID as f64).collect(),
        }
    }

    pub fn theta_true() -> Vec<f64> {
        vec![0.5, 2.5, 1.0]
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

impl Default for EnzymeModel {
    fn default() -> Self {
        Self::new()
    }
}

impl Simulator for EnzymeModel {
    fn dim_theta(&self) -> usize {
        3
    }

    fn dim_stat(&self) -> usize {
        8
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        let rates = [theta[0], theta[1], theta[2]];
        let traj = gillespie_ssa(&rates, INIT_STATE, &self.grid, rng);
        let c: Vec<f64> = traj.iter().map(|s| s[2] as f64).collect();
        let p: Vec<f64> = traj.iter().map(|s| s[3] as f64).collect();
        let mut out = bspline_ls(&self.grid, &c, 2, &[0.2], (0.0, 1.0))?;
        out.extend(bspline_ls(&self.grid, &p, 2, &[0.2], (0.0, 1.0))?);
        Ok(out)
    }
}

pub struct EnzymeBenchmark;

impl BenchmarkModel for EnzymeBenchmark {
    fn name(&self) -> &'static str {
        "enzyme"
    }

    fn theta_true(&self) -> Vec<f64> {
        EnzymeModel::theta_true()
    }

    fn generate(&self, rng: &mut RngStream) -> Result<(Arc<dyn Simulator>, Vec<f64>)> {
        let model = EnzymeModel::new();
        let t_obs = model.simulate(&EnzymeModel::theta_true(), rng)?;
        Ok((Arc::new(model), t_obs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conservation_identities_hold_at_every_grid_point() {
        let model = EnzymeModel::new();
        for seed in 0..100 {
            let mut rng = RngStream::new(100, seed);
            let traj = gillespie_ssa(&[0.5, 2.5, 1.0], INIT_STATE, model.grid(), &mut rng);
            assert_eq!(traj.len(), N_GRID);
            for s in &traj {
                assert_eq!(s[0] + s[2], 100, "enzyme conservation");
                assert_eq!(s[1] + s[2] + s[3], 100, "substrate conservation");
                assert!(s.iter().all(|&x| x >= 0));
            }
        }
    }

    #[test]
    fn irreversible_binding_exhausts_the_substrate() {
        // With unbinding and catalysis off, C only grows; run long enough
        // and everything binds.
        let grid: Vec<f64> = (1..=50).map(|j| j as f64).collect();
        let mut rng = RngStream::new(101, 0);
        let traj = gillespie_ssa(&[1.0, 0.0, 0.0], INIT_STATE, &grid, &mut rng);
        for w in traj.windows(2) {
            assert!(w[1][2] >= w[0][2], "complex count decreased");
        }
        assert_eq!(traj.last().unwrap()[2], 100);
    }

    #[test]
    fn zero_rates_freeze_the_initial_state() {
        let model = EnzymeModel::new();
        let mut rng = RngStream::new(102, 0);
        let traj = gillespie_ssa(&[0.0, 0.0, 0.0], INIT_STATE, model.grid(), &mut rng);
        for s in traj {
            assert_eq!(s, INIT_STATE);
        }
    }

    #[test]
    fn summary_has_eight_coefficients_and_is_deterministic() {
        let model = EnzymeModel::new();
        let t1 = model.simulate(&[0.5, 2.5, 1.0], &mut RngStream::new(103, 9)).unwrap();
        let t2 = model.simulate(&[0.5, 2.5, 1.0], &mut RngStream::new(103, 9)).unwrap();
        assert_eq!(t1.len(), 8);
        assert_eq!(t1, t2);
        assert!(t1.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn product_coefficients_grow_with_catalysis_rate() {
        let model = EnzymeModel::new();
        let mut slow_sum = 0.0;
        let mut fast_sum = 0.0;
        for seed in 0..30 {
            let slow =
                model.simulate(&[0.5, 2.5, 0.2], &mut RngStream::new(104, seed)).unwrap();
            let fast =
                model.simulate(&[0.5, 2.5, 5.0], &mut RngStream::new(105, seed)).unwrap();
            slow_sum += slow[7];
            fast_sum += fast[7];
        }
        assert!(fast_sum > slow_sum, "terminal product coefficient should grow");
    }
}
