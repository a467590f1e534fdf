//! Local search phase: trust-region quasi-likelihood refinement driven by
//! local linear regression, with smoothed Jacobian and covariance estimates.

use nalgebra::{DMatrix, DVector};

use crate::archive::SimArchive;
use crate::config::{Config, ModelCheckCenter};
use crate::diagnostics::diagnostics;
use crate::error::{Error, Result};
use crate::global::{stream_tags, GlobalState};
use crate::mathkit::linalg::SpdFactor;
use crate::mathkit::lp::l1_trust_step;
use crate::mathkit::regression::mv_least_squares;
use crate::result::{FitResult, PartialFit, Phase, TraceRecord};
use crate::sampling::{ellipsoid_box_uniform, RngStream};
use crate::simulator::{simulate_batch_with_redraw, Simulator};

/// Rolling state of the local phase.
pub struct LocalState {
    /// Current iterate.
    pub theta_hat: DVector<f64>,
    /// Latest candidate point.
    pub theta_tilde: DVector<f64>,
    /// Intercept of the latest local fit (predicted summary at the iterate).
    pub tau_hat: DVector<f64>,
    /// Smoothed Jacobian estimate (q x p).
    pub jac_smooth: DMatrix<f64>,
    /// Smoothed summary covariance estimate (q x q).
    pub sigma_smooth: DMatrix<f64>,
    /// Estimating function at the iterate.
    pub g_hat: DVector<f64>,
    /// Quasi-information matrix (p x p).
    pub omega_hat: DMatrix<f64>,
    /// Covariance of the intercept estimate (q x q).
    pub tau_cov: DMatrix<f64>,
    /// Dispersion of the estimating function (p x p).
    pub u_mat: DMatrix<f64>,
    /// Trust-region radius.
    pub rho: f64,
    /// Neighborhood size of the local fit.
    pub fit_size: usize,
    /// Local iteration counter.
    pub iter: usize,
    sigma_factor: Option<SpdFactor>,
}

/// Initialize from the completed global phase: the iterate is the archive
/// point whose bridge estimate is closest to the target, the neighborhood is
/// the elite floor, and the radius starts at a tenth of its cap.
pub fn init_local(global: &GlobalState, cfg: &Config) -> LocalState {
    let best = global
        .distances_sq
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("global phase leaves a nonempty archive");
    let theta_hat = global.archive.theta(best).clone();
    let p = theta_hat.len();
    let q = global.archive.dim_stat();
    LocalState {
        theta_tilde: theta_hat.clone(),
        theta_hat,
        tau_hat: DVector::zeros(q),
        jac_smooth: DMatrix::zeros(q, p),
        sigma_smooth: DMatrix::zeros(q, q),
        g_hat: DVector::zeros(p),
        omega_hat: DMatrix::zeros(p, p),
        tau_cov: DMatrix::zeros(q, q),
        u_mat: DMatrix::zeros(p, p),
        rho: cfg.rho_max / 10.0,
        fit_size: cfg.n_elite,
        iter: 0,
        sigma_factor: None,
    }
}

/// Refit the local linear model on the `fit_size` nearest archive pairs and
/// refresh the derived quantities. The first fit seeds the smoothed
/// estimates directly; later fits blend in with weight `lambda`.
pub fn local_fit_update(state: &mut LocalState, archive: &SimArchive, cfg: &Config) -> Result<()> {
    let p = state.theta_hat.len();
    let n = archive.len();
    if n < state.fit_size {
        return Err(Error::InvalidInput(format!(
            "archive holds {n} pairs, local fit needs {}",
            state.fit_size
        )));
    }

    // Parameter-space scaling for neighbor selection.
    let d_k = DVector::from_fn(p, |i, _| state.theta_hat[i].powi(2).max(1.0));
    let mut dist: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..p {
                let d = archive.theta(i)[j] - state.theta_hat[j];
                acc += d * d / d_k[j];
            }
            (acc, i)
        })
        .collect();
    let l = state.fit_size;
    dist.select_nth_unstable_by(l - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let neighbors = &dist[..l];

    let thetas: Vec<DVector<f64>> =
        neighbors.iter().map(|&(_, i)| archive.theta(i).clone()).collect();
    let stats: Vec<DVector<f64>> =
        neighbors.iter().map(|&(_, i)| archive.stat(i).clone()).collect();
    let fit = mv_least_squares(&thetas, &stats, &state.theta_hat)?;

    if state.fit_size == cfg.n_elite {
        state.jac_smooth = fit.jac;
        state.sigma_smooth = fit.err_cov;
    } else {
        state.jac_smooth = &state.jac_smooth * (1.0 - cfg.lambda) + fit.jac * cfg.lambda;
        state.sigma_smooth = &state.sigma_smooth * (1.0 - cfg.lambda) + fit.err_cov * cfg.lambda;
    }
    state.tau_hat = fit.tau;
    state.tau_cov = fit.tau_cov;

    let factor = SpdFactor::new(&state.sigma_smooth, "local summary covariance")?;
    let sinv_j = factor.solve_mat(&state.jac_smooth); // q x p
    let residual = archive.observed() - &state.tau_hat;
    state.g_hat = sinv_j.transpose() * residual;
    let omega = state.jac_smooth.transpose() * &sinv_j;
    state.omega_hat = (&omega + omega.transpose()) * 0.5;
    let u = sinv_j.transpose() * &state.tau_cov * &sinv_j;
    state.u_mat = (&u + u.transpose()) * 0.5;
    state.sigma_factor = Some(factor);
    Ok(())
}

/// Candidate point: the trust-region step applied to the iterate.
pub fn propose_candidate(state: &LocalState, bounds: &crate::bounds::Bounds) -> Result<DVector<f64>> {
    let delta = l1_trust_step(&state.omega_hat, &state.g_hat, &state.theta_hat, bounds, state.rho)?;
    Ok(&state.theta_hat + delta)
}

/// Squared norm of the estimating function in its dispersion metric, or
/// `None` when the dispersion cannot be factorized even with the ridge.
pub fn g_norm_sq(state: &LocalState) -> Option<f64> {
    match SpdFactor::new(&state.u_mat, "estimating-function dispersion") {
        Ok(factor) => Some(factor.quad_form(&state.g_hat)),
        Err(_) => {
            log::warn!("estimating-function dispersion not factorizable; treating as not converged");
            None
        }
    }
}

/// Convergence: the neighborhood is at full size and the estimating function
/// is small in its dispersion metric.
pub fn local_converged(state: &LocalState, cfg: &Config) -> bool {
    if state.fit_size != cfg.nfit_local {
        return false;
    }
    let p = state.theta_hat.len() as f64;
    matches!(g_norm_sq(state), Some(gn) if gn < p * cfg.tol_local)
}

/// Model-adequacy check on freshly simulated pairs near the candidate:
/// accept the candidate and double the radius when the local model explains
/// the new pairs, otherwise keep the iterate and quarter the radius.
pub fn check_and_adapt(
    state: &mut LocalState,
    new_thetas: &[DVector<f64>],
    new_stats: &[DVector<f64>],
    cfg: &Config,
) -> Result<bool> {
    let q = state.sigma_smooth.nrows() as f64;
    let center = match cfg.model_check_center {
        ModelCheckCenter::Candidate => &state.theta_tilde,
        ModelCheckCenter::Current => &state.theta_hat,
    };
    let factor = match &state.sigma_factor {
        Some(f) => f,
        None => return Err(Error::InvalidInput("model check before any local fit".into())),
    };
    let mut total = 0.0;
    for (theta, stat) in new_thetas.iter().zip(new_stats) {
        let predicted = &state.tau_hat + &state.jac_smooth * (theta - center);
        total += factor.quad_form(&(stat - predicted));
    }
    let accepted = total < q * new_thetas.len() as f64 * cfg.tol_model;
    if accepted {
        state.theta_hat = state.theta_tilde.clone();
        state.rho = (2.0 * state.rho).min(cfg.rho_max);
    } else {
        state.rho /= 4.0;
    }
    Ok(accepted)
}

/// Run the local phase to completion, consuming the global state. Returns
/// the final estimate with covariance, diagnostics, and the merged trace.
pub fn run_local(
    global: GlobalState,
    sim: &dyn Simulator,
    cfg: &Config,
    engine: &RngStream,
) -> Result<FitResult> {
    cfg.validate()?;
    let mut state = init_local(&global, cfg);
    let GlobalState { mut archive, mut trace, .. } = global;
    let iter_offset = trace.len();
    let p = state.theta_hat.len();

    for k in 0..cfg.max_local_iters {
        state.iter = k;
        local_fit_update(&mut state, &archive, cfg)?;
        state.theta_tilde = propose_candidate(&state, sim.bounds())?;
        let gn = g_norm_sq(&state);

        let converged =
            state.fit_size == cfg.nfit_local && matches!(gn, Some(v) if v < p as f64 * cfg.tol_local);
        if converged {
            trace.push(TraceRecord {
                phase: Phase::Local,
                iter: iter_offset + k,
                rho: Some(state.rho),
                fit_size: Some(state.fit_size),
                accepted: None,
                g_norm_sq: gn,
            });
            return assemble_result(&state, &archive, trace, p);
        }

        let mut proposal_rng = engine.derive(stream_tags::LOCAL_PROPOSALS).derive(k as u64);
        let new_thetas = ellipsoid_box_uniform(
            &state.theta_tilde,
            &state.omega_hat,
            sim.bounds(),
            cfg.nadd_local,
            &mut proposal_rng,
        )?;
        let center = state.theta_tilde.clone();
        let omega = state.omega_hat.clone();
        let (new_thetas, new_stats) = simulate_batch_with_redraw(
            sim,
            new_thetas,
            &engine.derive(stream_tags::SIM),
            archive.len(),
            &mut proposal_rng,
            &mut |rng| {
                ellipsoid_box_uniform(&center, &omega, sim.bounds(), 1, rng)
                    .expect("shape matrix factorized for the batch")
                    .pop()
                    .expect("ellipsoid draw")
            },
        )?;

        let rho_used = state.rho;
        let accepted = check_and_adapt(&mut state, &new_thetas, &new_stats, cfg)?;
        trace.push(TraceRecord {
            phase: Phase::Local,
            iter: iter_offset + k,
            rho: Some(rho_used),
            fit_size: Some(state.fit_size),
            accepted: Some(accepted),
            g_norm_sq: gn,
        });

        for (theta, stat) in new_thetas.into_iter().zip(new_stats) {
            archive.push(theta, stat);
        }
        state.fit_size = cfg.nfit_local.min(state.fit_size + cfg.nadd_local);
    }

    Err(Error::NonConvergence {
        phase: Phase::Local,
        iterations: cfg.max_local_iters,
        partial: Box::new(PartialFit {
            phase: Phase::Local,
            best_theta: state.theta_hat.as_slice().to_vec(),
            n_simulations: archive.len(),
            trace,
        }),
    })
}

fn assemble_result(
    state: &LocalState,
    archive: &SimArchive,
    trace: Vec<TraceRecord>,
    p: usize,
) -> Result<FitResult> {
    let omega_factor = SpdFactor::new(&state.omega_hat, "final quasi-information")?;
    let cov = omega_factor.inverse();
    let cov = (&cov + cov.transpose()) * 0.5;
    let std_errors: Vec<f64> = (0..p).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let diag = diagnostics(archive.observed(), &state.tau_hat, &state.sigma_smooth, p)?;

    Ok(FitResult {
        estimate: state.theta_tilde.as_slice().to_vec(),
        covariance: (0..p)
            .map(|i| (0..p).map(|j| cov[(i, j)]).collect())
            .collect(),
        std_errors,
        n_simulations: archive.len(),
        sh_stat: diag.sh_stat,
        sh_df: diag.sh_df,
        sh_pvalue: diag.sh_pvalue,
        std_scores: diag.std_scores,
        trace,
    })
}
