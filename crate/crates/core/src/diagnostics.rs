//! Model-adequacy outputs: the overidentification (Sargan-Hansen) test and
//! standardized summary-statistic scores.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathkit::linalg::SpdFactor;
use crate::mathkit::special::chisq_sf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sh_stat: f64,
    pub sh_df: usize,
    /// `None` when the model is exactly identified (df = 0).
    pub sh_pvalue: Option<f64>,
    pub std_scores: Vec<f64>,
}

/// Sargan-Hansen statistic `||t_obs - tau||^2_Sigma` with its chi-square
/// p-value on `q - p` degrees of freedom.
pub fn sargan_hansen(
    t_obs: &DVector<f64>,
    tau_hat: &DVector<f64>,
    sigma_hat: &DMatrix<f64>,
    p: usize,
) -> Result<(f64, usize, Option<f64>)> {
    let q = t_obs.len();
    if tau_hat.len() != q || sigma_hat.nrows() != q || sigma_hat.ncols() != q {
        return Err(Error::InvalidInput("overidentification test: dimension mismatch".into()));
    }
    if q < p {
        return Err(Error::InvalidInput(format!(
            "fewer statistics than parameters ({q} < {p})"
        )));
    }
    let factor = SpdFactor::new(sigma_hat, "overidentification test")?;
    let stat = factor.quad_form(&(t_obs - tau_hat));
    let df = q - p;
    let pvalue = if df == 0 { None } else { Some(chisq_sf(stat, df)?) };
    Ok((stat, df, pvalue))
}

/// Per-statistic standardized residuals `(t_obs_j - tau_j) / sqrt(sigma_jj)`.
pub fn standardized_scores(
    t_obs: &DVector<f64>,
    tau_hat: &DVector<f64>,
    sigma_hat: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let q = t_obs.len();
    let mut scores = Vec::with_capacity(q);
    for j in 0..q {
        let var = sigma_hat[(j, j)];
        if !var.is_finite() || var <= 0.0 {
            return Err(Error::DegenerateStatistic {
                index: j,
                reason: format!("non-positive variance {var} in standardized scores"),
            });
        }
        scores.push((t_obs[j] - tau_hat[j]) / var.sqrt());
    }
    Ok(scores)
}

/// Assemble the full diagnostics block.
pub fn diagnostics(
    t_obs: &DVector<f64>,
    tau_hat: &DVector<f64>,
    sigma_hat: &DMatrix<f64>,
    p: usize,
) -> Result<Diagnostics> {
    let (sh_stat, sh_df, sh_pvalue) = sargan_hansen(t_obs, tau_hat, sigma_hat, p)?;
    let std_scores = standardized_scores(t_obs, tau_hat, sigma_hat)?;
    Ok(Diagnostics { sh_stat, sh_df, sh_pvalue, std_scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_gives_zero_stat_and_unit_pvalue() {
        let t = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let sigma = DMatrix::identity(3, 3);
        let (stat, df, p) = sargan_hansen(&t, &t, &sigma, 1).unwrap();
        assert_eq!(stat, 0.0);
        assert_eq!(df, 2);
        assert_eq!(p, Some(1.0));
    }

    #[test]
    fn chi_square_two_closed_form() {
        // Residual (1, 1, sqrt(2)) under the identity: stat = 4, df = 2,
        // p-value exp(-2).
        let t_obs = DVector::from_vec(vec![1.0, 1.0, 2.0f64.sqrt()]);
        let tau = DVector::zeros(3);
        let sigma = DMatrix::identity(3, 3);
        let (stat, df, p) = sargan_hansen(&t_obs, &tau, &sigma, 1).unwrap();
        assert!((stat - 4.0).abs() < 1e-12);
        assert_eq!(df, 2);
        assert!((p.unwrap() - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn exactly_identified_suppresses_pvalue() {
        let t = DVector::from_vec(vec![1.0, 2.0]);
        let tau = DVector::from_vec(vec![0.5, 2.5]);
        let sigma = DMatrix::identity(2, 2);
        let (_, df, p) = sargan_hansen(&t, &tau, &sigma, 2).unwrap();
        assert_eq!(df, 0);
        assert_eq!(p, None);
    }

    #[test]
    fn stat_invariant_under_joint_linear_transform() {
        let mut stream = crate::sampling::RngStream::new(31, 0);
        let q = 4;
        let t_obs = DVector::from_fn(q, |_, _| stream.standard_normal());
        let tau = DVector::from_fn(q, |_, _| stream.standard_normal());
        let a = DMatrix::from_fn(q, q, |_, _| stream.standard_normal());
        let sigma = &a * a.transpose() + DMatrix::<f64>::identity(q, q);
        let (stat, _, _) = sargan_hansen(&t_obs, &tau, &sigma, 1).unwrap();

        // Any invertible transform applied jointly leaves the statistic alone.
        let m = DMatrix::from_fn(q, q, |i, j| {
            if i == j {
                2.0
            } else if i + 1 == j {
                0.7
            } else {
                0.0
            }
        });
        let (stat2, _, _) = sargan_hansen(
            &(&m * &t_obs),
            &(&m * &tau),
            &(&m * &sigma * m.transpose()),
            1,
        )
        .unwrap();
        assert!((stat - stat2).abs() < 1e-8 * stat.max(1.0), "{stat} vs {stat2}");
    }

    #[test]
    fn pvalue_monotone_in_stat() {
        let sigma = DMatrix::identity(3, 3);
        let tau = DVector::zeros(3);
        let mut prev = 1.0;
        for k in 1..20 {
            let t = DVector::from_vec(vec![k as f64 * 0.3, 0.0, 0.0]);
            let (_, _, p) = sargan_hansen(&t, &tau, &sigma, 1).unwrap();
            let p = p.unwrap();
            assert!(p <= prev);
            assert!((0.0..=1.0).contains(&p));
            prev = p;
        }
    }

    #[test]
    fn zero_residual_scores_are_zero() {
        let t = DVector::from_vec(vec![5.0, -3.0]);
        let sigma = DMatrix::identity(2, 2);
        assert_eq!(standardized_scores(&t, &t, &sigma).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn score_is_residual_over_sd() {
        let t_obs = DVector::from_vec(vec![2.0]);
        let tau = DVector::from_vec(vec![0.0]);
        let sigma = DMatrix::from_element(1, 1, 4.0);
        let s = standardized_scores(&t_obs, &tau, &sigma).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scores_invariant_under_joint_rescaling() {
        let t_obs = DVector::from_vec(vec![3.0, 1.0]);
        let tau = DVector::from_vec(vec![2.0, 0.5]);
        let sigma = DMatrix::from_row_slice(2, 2, &[0.25, 0.1, 0.1, 1.0]);
        let base = standardized_scores(&t_obs, &tau, &sigma).unwrap();

        // Rescale statistic 0 by 10 everywhere it appears.
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![10.0, 1.0]));
        let scaled =
            standardized_scores(&(&d * &t_obs), &(&d * &tau), &(&d * &sigma * d.transpose()))
                .unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_names_the_statistic() {
        let t = DVector::from_vec(vec![1.0, 2.0]);
        let tau = DVector::zeros(2);
        let mut sigma = DMatrix::identity(2, 2);
        sigma[(1, 1)] = 0.0;
        match standardized_scores(&t, &tau, &sigma) {
            Err(Error::DegenerateStatistic { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected degenerate statistic, got {other:?}"),
        }
    }
}
