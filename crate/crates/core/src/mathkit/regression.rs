//! Multivariate linear least squares on a centered design.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mathkit::linalg::SpdFactor;

/// Least-squares fit of `t_i = tau + B (theta_i - center) + error_i`.
#[derive(Debug, Clone)]
pub struct LocalLinearFit {
    /// Intercept: predicted summary at the center.
    pub tau: DVector<f64>,
    /// Slope matrix (q x p).
    pub jac: DMatrix<f64>,
    /// Residual covariance (q x q).
    pub err_cov: DMatrix<f64>,
    /// Covariance of the intercept estimate (q x q).
    pub tau_cov: DMatrix<f64>,
}

pub fn mv_least_squares(
    thetas: &[DVector<f64>],
    stats: &[DVector<f64>],
    center: &DVector<f64>,
) -> Result<LocalLinearFit> {
    let l = thetas.len();
    if l != stats.len() {
        return Err(Error::InvalidInput(format!(
            "regression inputs disagree: {l} parameter rows, {} statistic rows",
            stats.len()
        )));
    }
    let p = center.len();
    if l <= p + 1 {
        return Err(Error::InvalidInput(format!(
            "regression needs more than p+1 = {} rows, got {l}",
            p + 1
        )));
    }
    let q = stats[0].len();

    let design = DMatrix::from_fn(l, p + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            thetas[i][j - 1] - center[j - 1]
        }
    });
    let response = DMatrix::from_fn(l, q, |i, j| stats[i][j]);

    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &response;
    let factor = SpdFactor::new(&xtx, "least-squares normal equations")?;
    let beta = factor.solve_mat(&xty); // (p+1) x q

    let tau = DVector::from_iterator(q, beta.row(0).iter().copied());
    let jac = beta.rows(1, p).transpose();

    let resid = &response - &design * &beta;
    let dof = (l - p - 1) as f64;
    let mut err_cov = resid.transpose() * &resid / dof;
    // Exact symmetry for downstream factorizations.
    err_cov = (&err_cov + err_cov.transpose()) * 0.5;

    // Intercept variance factor: first diagonal entry of (X^T X)^{-1}.
    let mut e0 = DVector::zeros(p + 1);
    e0[0] = 1.0;
    let c = factor.solve_vec(&e0)[0];
    let tau_cov = &err_cov * c;

    Ok(LocalLinearFit { tau, jac, err_cov, tau_cov })
}
