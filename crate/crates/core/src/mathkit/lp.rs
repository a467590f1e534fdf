//! L1 trust-region step via a dense bounded-variable simplex.
//!
//! The step minimizes `||omega * delta - g||_1` subject to the parameter box
//! and per-coordinate trust-region caps. The residual is split into its
//! positive and negative parts, giving a linear program with `p` equality
//! rows and `3p` variables. Problems here are tiny (p rarely exceeds a
//! dozen), so a dense simplex with Bland's anti-cycling rule is the whole
//! story: no sparsity, no revised factorization updates.

use nalgebra::{DMatrix, DVector};

use crate::bounds::Bounds;
use crate::error::{Error, Result};

const RC_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;

/// Minimize `c^T x` subject to `a x = b`, `0 <= x <= upper` (entries of
/// `upper` may be infinite). `basis` must index an identity-like feasible
/// starting basis. Returns the primal solution.
fn bounded_simplex(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    upper: &[f64],
    mut basis: Vec<usize>,
) -> Result<Vec<f64>> {
    let m = a.nrows();
    let n = a.ncols();
    let mut at_upper = vec![false; n];
    let mut in_basis = vec![false; n];
    for &j in &basis {
        in_basis[j] = true;
    }

    // Hard cap: Bland's rule guarantees finite termination, so reaching this
    // means the arithmetic itself broke down.
    let max_iters = 2000 * (n + m);

    for _ in 0..max_iters {
        let b_mat = DMatrix::from_fn(m, m, |i, k| a[(i, basis[k])]);
        let lu = b_mat.clone().lu();

        // Basic values for the current nonbasic assignment.
        let mut rhs = b.clone();
        for j in 0..n {
            if !in_basis[j] && at_upper[j] {
                for i in 0..m {
                    rhs[i] -= a[(i, j)] * upper[j];
                }
            }
        }
        let xb = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("simplex basis matrix is singular".into()))?;

        // Duals and reduced costs.
        let cb = DVector::from_fn(m, |k, _| c[basis[k]]);
        let y = b_mat
            .transpose()
            .lu()
            .solve(&cb)
            .ok_or_else(|| Error::Numerical("simplex basis matrix is singular".into()))?;

        // Entering variable: Bland's rule, smallest eligible index.
        let mut entering = None;
        for j in 0..n {
            if in_basis[j] {
                continue;
            }
            let mut d = c[j];
            for i in 0..m {
                d -= y[i] * a[(i, j)];
            }
            let eligible = if at_upper[j] { d > RC_TOL } else { d < -RC_TOL };
            if eligible {
                entering = Some(j);
                break;
            }
        }
        let Some(e) = entering else {
            // Optimal: assemble the full solution.
            let mut x = vec![0.0; n];
            for j in 0..n {
                if !in_basis[j] && at_upper[j] {
                    x[j] = upper[j];
                }
            }
            for k in 0..m {
                x[basis[k]] = xb[k];
            }
            return Ok(x);
        };

        let a_e = DVector::from_fn(m, |i, _| a[(i, e)]);
        let w = lu
            .solve(&a_e)
            .ok_or_else(|| Error::Numerical("simplex basis matrix is singular".into()))?;
        // Moving away from the active bound by t >= 0 changes basic values by
        // -sign * t * w, with sign +1 when entering from the lower bound.
        let sign = if at_upper[e] { -1.0 } else { 1.0 };

        let mut t_best = upper[e]; // bound-to-bound flip distance
        let mut leaving: Option<usize> = None; // row index
        let mut leaving_to_upper = false;
        for i in 0..m {
            let rate = sign * w[i];
            let (limit, to_upper) = if rate > PIVOT_TOL {
                (xb[i].max(0.0) / rate, false)
            } else if rate < -PIVOT_TOL && upper[basis[i]].is_finite() {
                ((upper[basis[i]] - xb[i]).max(0.0) / -rate, true)
            } else {
                continue;
            };
            let replace = match leaving {
                None => limit < t_best - PIVOT_TOL,
                // Bland tie-break: keep the smallest basis column index.
                Some(cur) => {
                    limit < t_best - PIVOT_TOL
                        || (limit <= t_best + PIVOT_TOL && basis[i] < basis[cur])
                }
            };
            if replace {
                t_best = limit.min(t_best);
                leaving = Some(i);
                leaving_to_upper = to_upper;
            }
        }

        if t_best.is_infinite() {
            return Err(Error::Numerical("simplex detected an unbounded ray".into()));
        }

        match leaving {
            None => {
                // The entering variable hits its own opposite bound.
                at_upper[e] = !at_upper[e];
            }
            Some(row) => {
                let out = basis[row];
                in_basis[out] = false;
                at_upper[out] = leaving_to_upper;
                basis[row] = e;
                in_basis[e] = true;
                at_upper[e] = false;
            }
        }
    }
    Err(Error::Numerical("simplex iteration cap exceeded".into()))
}

/// Value of the trust-region objective at a step.
pub fn l1_objective(omega: &DMatrix<f64>, g: &DVector<f64>, delta: &DVector<f64>) -> f64 {
    (omega * delta - g).iter().map(|r| r.abs()).sum()
}

/// Solve `min ||omega * delta - g||_1` subject to
/// `lower_i <= theta_i + delta_i <= upper_i` and
/// `|delta_i| <= max(1, |theta_i|) * rho`.
///
/// The feasible region always contains `delta = 0` when `theta` lies in the
/// box, so the program cannot be infeasible; the objective is bounded below
/// by zero, so it cannot be unbounded.
pub fn l1_trust_step(
    omega: &DMatrix<f64>,
    g: &DVector<f64>,
    theta: &DVector<f64>,
    bounds: &Bounds,
    rho: f64,
) -> Result<DVector<f64>> {
    let p = theta.len();
    if omega.nrows() != p || omega.ncols() != p || g.len() != p || bounds.dim() != p {
        return Err(Error::InvalidInput("trust-region step: dimension mismatch".into()));
    }
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::InvalidInput(format!("trust-region radius must be positive, got {rho}")));
    }

    let mut lo = vec![0.0; p];
    let mut hi = vec![0.0; p];
    for i in 0..p {
        let cap = theta[i].abs().max(1.0) * rho;
        lo[i] = (bounds.lower()[i] - theta[i]).max(-cap);
        hi[i] = (bounds.upper()[i] - theta[i]).min(cap);
        if lo[i] > hi[i] {
            return Err(Error::InvalidInput(format!(
                "trust-region step: coordinate {i} of theta lies outside the box"
            )));
        }
    }

    // Shift delta to start at its lower bound so every variable has lower
    // bound zero: columns are [shifted delta | s+ | s-].
    let n = 3 * p;
    let mut a = DMatrix::zeros(p, n);
    for i in 0..p {
        for j in 0..p {
            a[(i, j)] = omega[(i, j)];
        }
        a[(i, p + i)] = -1.0;
        a[(i, 2 * p + i)] = 1.0;
    }
    let mut b = DVector::zeros(p);
    for i in 0..p {
        b[i] = g[i] - (0..p).map(|j| omega[(i, j)] * lo[j]).sum::<f64>();
    }
    let mut c = DVector::zeros(n);
    let mut upper = vec![f64::INFINITY; n];
    for i in 0..p {
        c[p + i] = 1.0;
        c[2 * p + i] = 1.0;
        upper[i] = hi[i] - lo[i];
    }

    // Initial basis: the slack matching the sign of each row of b, giving a
    // feasible identity basis with no phase-one pass. The s+ column enters
    // with coefficient -1, so it carries rows with negative b.
    let mut basis = Vec::with_capacity(p);
    for i in 0..p {
        if b[i] >= 0.0 {
            basis.push(2 * p + i);
        } else {
            basis.push(p + i);
        }
    }

    let x = bounded_simplex(&a, &b, &c, &upper, basis)?;

    let mut delta = DVector::zeros(p);
    for i in 0..p {
        let d = x[i] + lo[i];
        debug_assert!(d >= lo[i] - 1e-9 && d <= hi[i] + 1e-9);
        delta[i] = d.clamp(lo[i], hi[i]);
    }
    Ok(delta)
}
