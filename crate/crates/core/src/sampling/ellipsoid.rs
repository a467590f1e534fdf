use nalgebra::{DMatrix, DVector};

use crate::bounds::Bounds;
use crate::error::Result;
use crate::mathkit::linalg::conditioned_cholesky;
use crate::sampling::RngStream;

const REJECTION_CAP: usize = 10_000;

/// Draw `n` points uniformly from the intersection of the box with the
/// ellipsoid `{x : (x - center)^T omega (x - center) <= 1}`.
///
/// A point uniform on the unit ball (Gaussian direction, radius `U^{1/p}`)
/// is mapped through the inverse transpose of the triangular factor of
/// `omega`; box rejection is capped and falls back to clamping.
pub fn ellipsoid_box_uniform(
    center: &DVector<f64>,
    omega: &DMatrix<f64>,
    bounds: &Bounds,
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<DVector<f64>>> {
    let p = center.len();
    let lower = conditioned_cholesky(omega, "ellipsoid shape matrix")?;
    let upper_t = lower.transpose();

    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut candidate = center.clone();
        let mut accepted = false;
        for _ in 0..REJECTION_CAP {
            let mut z = DVector::from_fn(p, |_, _| rng.standard_normal());
            let norm = z.norm();
            if norm == 0.0 {
                continue;
            }
            let radius = rng.uniform().powf(1.0 / p as f64);
            z *= radius / norm;
            // Solve L^T w = z so that w^T omega w = z^T z <= 1.
            let w = upper_t
                .solve_upper_triangular(&z)
                .expect("factor has positive diagonal");
            candidate = center + w;
            if bounds.contains(candidate.as_slice()) {
                accepted = true;
                break;
            }
        }
        if !accepted {
            log::debug!("ellipsoid sampling: rejection cap hit, clamping to the box");
            bounds.clamp(candidate.as_mut_slice());
        }
        out.push(candidate);
    }
    Ok(out)
}
