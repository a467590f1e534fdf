//! Logistic regression with an intercept, a deterministic trend, and two
//! correlated Gaussian covariates. The summary statistics are the sufficient
//! statistics, so the quasi-likelihood root coincides with the maximum
//! likelihood estimator; the model exists to benchmark against it.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::bounds::Bounds;
use crate::error::Result;
use crate::models::BenchmarkModel;
use crate::sampling::RngStream;
use crate::simulator::Simulator;

const N_OBS: usize = 100;

pub struct LogitModel {
    /// Design matrix with columns [1, x, z, w], frozen per dataset and shared
    /// by the observed data and every fitting simulation.
    design: DMatrix<f64>,
    bounds: Bounds,
}

impl LogitModel {
    pub fn theta_true() -> Vec<f64> {
        vec![-1.0, 1.0, 0.5, -0.5]
    }

    /// Draw a fresh covariate set: deterministic trend plus a correlated
    /// Gaussian pair with variances (1, 2) and covariance 1.
    pub fn sample_design(rng: &mut RngStream) -> DMatrix<f64> {
        let n = N_OBS;
        let mut design = DMatrix::zeros(n, 4);
        for i in 0..n {
            let trend = (2.0 * (i + 1) as f64 - n as f64) / (n as f64 - 1.0);
            let z = rng.standard_normal();
            let w = z + rng.standard_normal();
            design[(i, 0)] = 1.0;
            design[(i, 1)] = trend;
            design[(i, 2)] = z;
            design[(i, 3)] = w;
        }
        design
    }

    pub fn new(design: DMatrix<f64>) -> Self {
        assert_eq!(design.ncols(), 4);
        Self { design, bounds: Bounds::new(vec![-5.0; 4], vec![5.0; 4]).unwrap() }
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    /// Draw the response and return the sufficient statistics `X^T y`.
    fn summarize(&self, theta: &[f64], rng: &mut RngStream) -> Vec<f64> {
        let n = self.design.nrows();
        let mut t = vec![0.0; 4];
        for i in 0..n {
            let eta: f64 = (0..4).map(|j| self.design[(i, j)] * theta[j]).sum();
            let prob = 1.0 / (1.0 + (-eta).exp());
            if rng.uniform() < prob {
                for (j, tj) in t.iter_mut().enumerate() {
                    *tj += self.design[(i, j)];
                }
            }
        }
        t
    }
}

impl Simulator for LogitModel {
    fn dim_theta(&self) -> usize {
        4
    }

    fn dim_stat(&self) -> usize {
        4
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        Ok(self.summarize(theta, rng))
    }
}

pub struct LogitBenchmark;

impl BenchmarkModel for LogitBenchmark {
    fn name(&self) -> &'static str {
        "logit"
    }

    fn theta_true(&self) -> Vec<f64> {
        LogitModel::theta_true()
    }

    fn generate(&self, rng: &mut RngStream) -> Result<(Arc<dyn Simulator>, Vec<f64>)> {
        let model = LogitModel::new(LogitModel::sample_design(rng));
        let t_obs = model.summarize(&LogitModel::theta_true(), rng);
        Ok((Arc::new(model), t_obs))
    }
}
