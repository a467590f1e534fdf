//! Global search phase: Latin hypercube initialization, nearest-neighbor
//! bridge estimation, robust weighting, and elite-sample reproduction.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::archive::SimArchive;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::mathkit::linalg::SpdFactor;
use crate::mathkit::robust::{robust_scatter, RobustScatter};
use crate::result::{PartialFit, Phase, TraceRecord};
use crate::sampling::{latin_hypercube, truncated_mvn_mixture, RngStream};
use crate::simulator::{simulate_batch_with_redraw, Simulator};

pub(crate) mod stream_tags {
    pub const LHS: u64 = 1;
    pub const SIM: u64 = 2;
    pub const GLOBAL_PROPOSALS: u64 = 3;
    pub const LOCAL_PROPOSALS: u64 = 4;
}

/// State of the global phase after a refresh: bridge estimates, weighting
/// matrix, and the current elite sample.
pub struct GlobalState {
    pub archive: SimArchive,
    /// Squared box widths: diagonal of the parameter-distance scaling.
    pub d0: DVector<f64>,
    pub scatter: RobustScatter,
    /// Bridge estimate for every archive point.
    pub bridge: Vec<DVector<f64>>,
    /// Squared weighted distance of every bridge estimate to the target.
    pub distances_sq: Vec<f64>,
    /// Archive indices of the elite, ascending by distance.
    pub elite_idx: Vec<usize>,
    pub elite_size: usize,
    pub iter: usize,
    pub trace: Vec<TraceRecord>,
}

fn ceil_sqrt(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(1, n)
}

/// Scaled squared distance between parameter vectors under a diagonal weighting.
fn scaled_dist_sq(a: &DVector<f64>, b: &DVector<f64>, diag: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.len() {
        let d = a[j] - b[j];
        acc += d * d / diag[j];
    }
    acc
}

/// Tricube-weighted nearest-neighbor estimate of the bridge function at
/// archive point `i`: the stats of the `ceil(sqrt(N))` closest points
/// (including the point itself), weighted by `(1 - (d/dbar)^3)^3` and
/// normalized. Ties at the boundary resolve to the lowest index; if every
/// neighbor coincides the estimate is a plain average.
pub fn bridge_knn(archive: &SimArchive, d0: &DVector<f64>, i: usize) -> DVector<f64> {
    let n = archive.len();
    debug_assert!(n >= 2, "bridge estimation needs at least two points");
    let k = ceil_sqrt(n);
    let theta_i = archive.theta(i);

    let mut dist: Vec<(f64, usize)> = (0..n)
        .map(|r| (scaled_dist_sq(archive.theta(r), theta_i, d0), r))
        .collect();
    dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let neighbors = &mut dist[..k];
    neighbors.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let dbar = neighbors[k - 1].0.sqrt();
    let q = archive.dim_stat();
    let mut acc = DVector::zeros(q);
    if dbar == 0.0 {
        for &(_, r) in neighbors.iter() {
            acc += archive.stat(r);
        }
        return acc / k as f64;
    }
    let mut total = 0.0;
    for &(d_sq, r) in neighbors.iter() {
        let ratio = d_sq.sqrt() / dbar;
        let w = (1.0 - ratio * ratio * ratio).powi(3);
        acc += archive.stat(r) * w;
        total += w;
    }
    acc / total
}

/// Elite-sample size at archive size `n_k`: decays from over half the
/// initial population toward `n_elite` as simulations accumulate.
pub fn elite_size(n_k: usize, cfg: &Config) -> usize {
    let ratio = n_k as f64 / cfg.n_init as f64;
    let decay = cfg.a_elite.powf(ratio * ratio);
    let e = cfg.n_elite as f64 + (cfg.n_init - cfg.n_elite) as f64 * decay;
    (e.ceil() as usize).min(n_k)
}

/// Convergence of the global phase: every coordinate of the elite sample has
/// standard deviation below `max(1, |mean|) * tol_global`.
pub fn global_converged(state: &GlobalState, cfg: &Config) -> bool {
    let p = state.d0.len();
    let e = state.elite_idx.len();
    if e == 0 {
        return false;
    }
    for j in 0..p {
        let mean = state
            .elite_idx
            .iter()
            .map(|&i| state.archive.theta(i)[j])
            .sum::<f64>()
            / e as f64;
        let sd = if e < 2 {
            0.0
        } else {
            (state
                .elite_idx
                .iter()
                .map(|&i| {
                    let d = state.archive.theta(i)[j] - mean;
                    d * d
                })
                .sum::<f64>()
                / (e - 1) as f64)
                .sqrt()
        };
        if sd >= mean.abs().max(1.0) * cfg.tol_global {
            return false;
        }
    }
    true
}

/// Recompute bridge estimates, the weighting matrix, distances, and the
/// elite sample for the current archive.
fn refresh(state: &mut GlobalState, cfg: &Config) -> Result<()> {
    let n = state.archive.len();
    let q = state.archive.dim_stat();

    state.bridge = {
        let archive = &state.archive;
        let d0 = &state.d0;
        (0..n)
            .into_par_iter()
            .map(|i| bridge_knn(archive, d0, i))
            .collect()
    };

    let residuals = DMatrix::from_fn(n, q, |i, j| state.archive.stat(i)[j] - state.bridge[i][j]);

    // A summary statistic that is constant across the archive leaves only
    // float rounding in its residual column; its MAD is then a meaningless
    // 1e-16-scale number that poisons the weighting matrix. Detect it
    // against the statistic's own magnitude before estimating the scatter.
    for j in 0..q {
        let mut max_abs_stat = 0.0f64;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            max_abs_stat = max_abs_stat.max(state.archive.stat(i)[j].abs());
            lo = lo.min(residuals[(i, j)]);
            hi = hi.max(residuals[(i, j)]);
        }
        if hi - lo <= 1e-12 * max_abs_stat.max(1.0) {
            return Err(Error::DegenerateStatistic {
                index: j,
                reason: "summary statistic is constant across the archive".into(),
            });
        }
    }
    state.scatter = robust_scatter(&residuals)?;

    let factor = SpdFactor::new(&state.scatter.sigma, "global weighting matrix")?;
    let t_obs = state.archive.observed().clone();
    state.distances_sq = state
        .bridge
        .par_iter()
        .map(|tau| factor.quad_form(&(&t_obs - tau)))
        .collect();

    let e_k = elite_size(n, cfg);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        state.distances_sq[a]
            .total_cmp(&state.distances_sq[b])
            .then(a.cmp(&b))
    });
    order.truncate(e_k);
    state.elite_size = e_k;
    state.elite_idx = order;
    Ok(())
}

/// Draw the next generation from the elite mixture and simulate it.
fn reproduce(
    state: &mut GlobalState,
    sim: &dyn Simulator,
    cfg: &Config,
    engine: &RngStream,
) -> Result<()> {
    let elite_thetas: Vec<DVector<f64>> = state
        .elite_idx
        .iter()
        .map(|&i| state.archive.theta(i).clone())
        .collect();
    let e = elite_thetas.len();
    let p = state.d0.len();

    let mean = elite_thetas.iter().fold(DVector::zeros(p), |acc, t| acc + t) / e as f64;
    let mut cov = DMatrix::zeros(p, p);
    if e > 1 {
        for t in &elite_thetas {
            let c = t - &mean;
            cov += &c * c.transpose();
        }
        cov /= (e - 1) as f64;
    }

    let mut proposal_rng = engine
        .derive(stream_tags::GLOBAL_PROPOSALS)
        .derive(state.iter as u64);
    let offspring = truncated_mvn_mixture(
        &elite_thetas,
        &cov,
        sim.bounds(),
        cfg.nadd_global,
        &mut proposal_rng,
    );

    let first_index = state.archive.len();
    let bounds = sim.bounds();
    let (offspring, stats) = simulate_batch_with_redraw(
        sim,
        offspring,
        &engine.derive(stream_tags::SIM),
        first_index,
        &mut proposal_rng,
        &mut |rng| {
            truncated_mvn_mixture(&elite_thetas, &cov, bounds, 1, rng)
                .pop()
                .expect("mixture draw")
        },
    )?;
    for (theta, stat) in offspring.into_iter().zip(stats) {
        state.archive.push(theta, stat);
    }
    Ok(())
}

/// One full global iteration: refresh estimates and, unless converged,
/// reproduce the elite. Returns whether the convergence test passed.
pub fn global_iterate(
    state: &mut GlobalState,
    sim: &dyn Simulator,
    cfg: &Config,
    engine: &RngStream,
) -> Result<bool> {
    refresh(state, cfg)?;
    state.trace.push(TraceRecord {
        phase: Phase::Global,
        iter: state.iter,
        rho: None,
        fit_size: Some(state.elite_size),
        accepted: None,
        g_norm_sq: None,
    });
    if global_converged(state, cfg) {
        return Ok(true);
    }
    reproduce(state, sim, cfg, engine)?;
    state.iter += 1;
    Ok(false)
}

/// Run the whole global phase: Latin hypercube initialization followed by
/// elite-sample iterations until the spread test passes or the cap is hit.
pub fn run_global(
    sim: &dyn Simulator,
    t_obs: &DVector<f64>,
    cfg: &Config,
    engine: &RngStream,
) -> Result<GlobalState> {
    cfg.validate()?;
    let bounds = sim.bounds();
    if bounds.dim() != sim.dim_theta() {
        return Err(Error::InvalidInput("simulator bounds do not match its dimension".into()));
    }
    if t_obs.len() != sim.dim_stat() {
        return Err(Error::InvalidInput(format!(
            "observed summary has length {}, simulator produces {}",
            t_obs.len(),
            sim.dim_stat()
        )));
    }
    if sim.dim_stat() < sim.dim_theta() {
        return Err(Error::InvalidInput(format!(
            "need at least as many statistics as parameters ({} < {})",
            sim.dim_stat(),
            sim.dim_theta()
        )));
    }

    let mut lhs_rng = engine.derive(stream_tags::LHS);
    let initial = latin_hypercube(cfg.n_init, bounds, &mut lhs_rng);
    // Replacements for degenerate initial points are plain uniform draws.
    let (initial, stats) = simulate_batch_with_redraw(
        sim,
        initial,
        &engine.derive(stream_tags::SIM),
        0,
        &mut lhs_rng,
        &mut |rng| {
            DVector::from_fn(bounds.dim(), |j, _| {
                bounds.lower()[j] + rng.uniform() * (bounds.upper()[j] - bounds.lower()[j])
            })
        },
    )?;

    let mut archive = SimArchive::new(t_obs.clone());
    for (theta, stat) in initial.into_iter().zip(stats) {
        archive.push(theta, stat);
    }

    let mut state = GlobalState {
        archive,
        d0: DVector::from_vec(bounds.squared_ranges()),
        scatter: RobustScatter {
            sigma: DMatrix::zeros(0, 0),
            mads: DVector::zeros(0),
            rank_corr: DMatrix::zeros(0, 0),
        },
        bridge: Vec::new(),
        distances_sq: Vec::new(),
        elite_idx: Vec::new(),
        elite_size: 0,
        iter: 0,
        trace: Vec::new(),
    };

    for _ in 0..cfg.max_global_iters {
        if global_iterate(&mut state, sim, cfg, engine)? {
            return Ok(state);
        }
    }
    let best = state
        .distances_sq
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| state.archive.theta(i).as_slice().to_vec())
        .unwrap_or_default();
    Err(Error::NonConvergence {
        phase: Phase::Global,
        iterations: cfg.max_global_iters,
        partial: Box::new(PartialFit {
            phase: Phase::Global,
            best_theta: best,
            n_simulations: state.archive.len(),
            trace: state.trace,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Bounds;

    #[test]
    fn elite_size_hand_values() {
        let cfg = Config::default();
        assert_eq!(elite_size(1000, &cfg), 550);
        assert_eq!(elite_size(2000, &cfg), 157);
        // In the limit the decay vanishes and the floor remains.
        assert_eq!(elite_size(100_000, &cfg), cfg.n_elite);
    }

    #[test]
    fn elite_size_monotone_and_floored() {
        let cfg = Config::default();
        let mut prev = usize::MAX;
        for n in (1000..20_000).step_by(500) {
            let e = elite_size(n, &cfg);
            assert!(e <= prev);
            assert!(e >= cfg.n_elite);
            prev = e;
        }
    }

    fn tiny_archive(thetas: &[f64], stats: &[f64]) -> SimArchive {
        let mut archive = SimArchive::new(DVector::from_vec(vec![0.0]));
        for (&t, &s) in thetas.iter().zip(stats) {
            archive.push(DVector::from_vec(vec![t]), DVector::from_vec(vec![s]));
        }
        archive
    }

    #[test]
    fn bridge_of_constant_stats_is_that_constant() {
        let archive = tiny_archive(&[0.0, 0.3, 0.6, 0.9], &[2.5, 2.5, 2.5, 2.5]);
        let d0 = DVector::from_vec(vec![1.0]);
        for i in 0..4 {
            let tau = bridge_knn(&archive, &d0, i);
            assert!((tau[0] - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn bridge_matches_hand_computed_tricube_mean() {
        // N = 9 points at 0, 1, ..., 8 with stats equal to the position.
        // k = 3: at point 0 the neighbors are {0, 1, 2}, dbar = 2.
        // Weights: (1-0)^3 = 1, (1-(1/2)^3)^3 = (7/8)^3, boundary weight 0.
        let thetas: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let archive = tiny_archive(&thetas, &thetas);
        let d0 = DVector::from_vec(vec![1.0]);
        let tau = bridge_knn(&archive, &d0, 0);
        let w1 = (1.0f64 - 0.125).powi(3);
        let expected = (0.0 + w1 * 1.0) / (1.0 + w1);
        assert!((tau[0] - expected).abs() < 1e-12, "{} vs {expected}", tau[0]);
    }

    #[test]
    fn self_weight_is_one_before_normalization() {
        // With two coincident cluster points, the self point dominates: the
        // farthest neighbor contributes weight zero.
        let archive = tiny_archive(&[0.0, 0.0, 5.0, 9.0], &[1.0, 1.0, 7.0, 9.0]);
        let d0 = DVector::from_vec(vec![1.0]);
        // k = 2 at N = 4: neighbors of point 0 are {0, 1}, both at distance 0
        // -> dbar = 0 -> plain average of coincident stats.
        let tau = bridge_knn(&archive, &d0, 0);
        assert!((tau[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn converged_when_elite_degenerate() {
        let cfg = Config { tol_global: 0.1, ..Config::default() };
        let mut archive = SimArchive::new(DVector::from_vec(vec![0.0]));
        for _ in 0..5 {
            archive.push(DVector::from_vec(vec![3.0]), DVector::from_vec(vec![0.0]));
        }
        let state = GlobalState {
            archive,
            d0: DVector::from_vec(vec![1.0]),
            scatter: RobustScatter {
                sigma: DMatrix::identity(1, 1),
                mads: DVector::from_vec(vec![1.0]),
                rank_corr: DMatrix::identity(1, 1),
            },
            bridge: Vec::new(),
            distances_sq: Vec::new(),
            elite_idx: vec![0, 1, 2, 3, 4],
            elite_size: 5,
            iter: 0,
            trace: Vec::new(),
        };
        assert!(global_converged(&state, &cfg));
    }

    fn spread_state(values: &[f64]) -> GlobalState {
        let mut archive = SimArchive::new(DVector::from_vec(vec![0.0]));
        for &v in values {
            archive.push(DVector::from_vec(vec![v]), DVector::from_vec(vec![0.0]));
        }
        GlobalState {
            elite_idx: (0..values.len()).collect(),
            elite_size: values.len(),
            archive,
            d0: DVector::from_vec(vec![1.0]),
            scatter: RobustScatter {
                sigma: DMatrix::identity(1, 1),
                mads: DVector::from_vec(vec![1.0]),
                rank_corr: DMatrix::identity(1, 1),
            },
            bridge: Vec::new(),
            distances_sq: Vec::new(),
            iter: 0,
            trace: Vec::new(),
        }
    }

    #[test]
    fn spread_cases_follow_the_tolerance_rule() {
        let cfg = Config { tol_global: 0.1, ..Config::default() };
        // Mean 0, sd 0.5: 0.5 >= 0.1 * max(1, 0) -> not converged.
        let wide = spread_state(&[-0.5, 0.0, 0.5, 0.5, -0.5]);
        assert!(!global_converged(&wide, &cfg));
        // Mean 100, sd 5: 5 < 0.1 * 100 -> converged.
        let tight = spread_state(&[95.0, 100.0, 105.0, 100.0, 100.0]);
        let sd = {
            let m = 100.0;
            let vals = [95.0f64, 100.0, 105.0, 100.0, 100.0];
            (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 4.0).sqrt()
        };
        assert!(sd < 10.0);
        assert!(global_converged(&tight, &cfg));
    }

    struct ConstantSim {
        bounds: Bounds,
    }

    impl Simulator for ConstantSim {
        fn dim_theta(&self) -> usize {
            1
        }
        fn dim_stat(&self) -> usize {
            1
        }
        fn bounds(&self) -> &Bounds {
            &self.bounds
        }
        fn simulate(&self, _theta: &[f64], _rng: &mut RngStream) -> Result<Vec<f64>> {
            Ok(vec![7.0])
        }
    }

    #[test]
    fn constant_simulator_surfaces_zero_mad_with_index() {
        let sim = ConstantSim { bounds: Bounds::new(vec![0.0], vec![1.0]).unwrap() };
        let cfg = Config { n_init: 50, n_elite: 10, ..Config::default() };
        let engine = RngStream::new(1, 0);
        match run_global(&sim, &DVector::from_vec(vec![7.0]), &cfg, &engine) {
            Err(Error::DegenerateStatistic { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected degenerate statistic, got {:?}", other.map(|_| ())),
        }
    }
}
