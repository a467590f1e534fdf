use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Ridge multipliers tried in order when a factorization fails: no ridge,
/// then decade steps from 1e-8 up to 1e-2 of the mean diagonal.
const RIDGE_STEPS: [f64; 8] = [0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

/// A Cholesky factorization of a symmetric matrix, conditioned with an
/// escalating ridge when the matrix is not numerically positive definite.
pub struct SpdFactor {
    lower: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    ridge: f64,
}

impl SpdFactor {
    pub fn new(v: &DMatrix<f64>, context: &str) -> Result<Self> {
        let q = v.nrows();
        if q == 0 || v.ncols() != q {
            return Err(Error::InvalidInput(format!(
                "{context}: expected a square matrix, got {}x{}",
                v.nrows(),
                v.ncols()
            )));
        }
        let scale = (v.trace() / q as f64).abs();
        for &eps in &RIDGE_STEPS {
            let ridge = eps * scale;
            let mut m = v.clone();
            if ridge > 0.0 {
                for i in 0..q {
                    m[(i, i)] += ridge;
                }
            }
            if let Some(chol) = Cholesky::new(m) {
                if ridge > 0.0 {
                    log::debug!("{context}: ridge {ridge:.3e} applied to reach positive definiteness");
                }
                return Ok(Self { lower: chol.l(), chol, ridge });
            }
        }
        Err(Error::SingularMatrix { context: context.to_string() })
    }

    /// Ridge that was added to the diagonal (0 when none was needed).
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// Lower-triangular factor `L` with `L L^T` equal to the conditioned matrix.
    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn solve_mat(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(rhs)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    /// Quadratic form `x^T V^{-1} x`, evaluated through the triangular factor.
    pub fn quad_form(&self, x: &DVector<f64>) -> f64 {
        let z = self
            .lower
            .solve_lower_triangular(x)
            .expect("factor has positive diagonal");
        z.norm_squared()
    }
}

/// Solve `v x = rhs` for a symmetric `v`, applying the ridge policy if the
/// plain factorization fails. Returns the solution and the ridge used.
pub fn spd_solve(v: &DMatrix<f64>, rhs: &DMatrix<f64>, context: &str) -> Result<(DMatrix<f64>, f64)> {
    let factor = SpdFactor::new(v, context)?;
    Ok((factor.solve_mat(rhs), factor.ridge()))
}

/// Squared Mahalanobis norm `x^T v^{-1} x`.
pub fn mahalanobis_sq(x: &DVector<f64>, v: &DMatrix<f64>) -> Result<f64> {
    let factor = SpdFactor::new(v, "mahalanobis norm")?;
    Ok(factor.quad_form(x))
}

/// Lower-triangular factor of a symmetric matrix under the ridge policy.
/// Used where the factor itself is needed rather than a solve.
pub fn conditioned_cholesky(v: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    Ok(SpdFactor::new(v, context)?.lower)
}
