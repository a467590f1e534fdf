use nalgebra::{DMatrix, DVector};

use crate::bounds::Bounds;
use crate::mathkit::linalg::conditioned_cholesky;
use crate::sampling::RngStream;

const REJECTION_CAP: usize = 1000;

/// Draw `n` points from a uniform mixture of truncated normals, one
/// component per elite row, all with covariance `cov`, truncated to the box.
///
/// Each draw rejects against the box up to a cap and then falls back to
/// coordinate clamping, so an output is always produced. A zero covariance
/// degenerates to exact copies of the mixture centers.
pub fn truncated_mvn_mixture(
    elite: &[DVector<f64>],
    cov: &DMatrix<f64>,
    bounds: &Bounds,
    n: usize,
    rng: &mut RngStream,
) -> Vec<DVector<f64>> {
    assert!(!elite.is_empty(), "mixture needs at least one component");
    let p = bounds.dim();

    let lower = if cov.amax() == 0.0 {
        None
    } else {
        // The ridge policy guarantees a factor for any symmetric PSD input
        // with positive trace.
        Some(conditioned_cholesky(cov, "mixture covariance").unwrap_or_else(|_| DMatrix::zeros(p, p)))
    };

    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mean = &elite[rng.index(elite.len())];
        let mut candidate = mean.clone();
        if let Some(l) = &lower {
            let mut accepted = false;
            for _ in 0..REJECTION_CAP {
                let z = DVector::from_fn(p, |_, _| rng.standard_normal());
                candidate = mean + l * z;
                if bounds.contains(candidate.as_slice()) {
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                log::debug!("truncated mixture: rejection cap hit, clamping to the box");
                bounds.clamp(candidate.as_mut_slice());
            }
        } else if !bounds.contains(candidate.as_slice()) {
            bounds.clamp(candidate.as_mut_slice());
        }
        out.push(candidate);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_covariance_copies_elite_rows() {
        let elite = vec![
            DVector::from_vec(vec![0.25, 0.75]),
            DVector::from_vec(vec![0.5, 0.5]),
        ];
        let cov = DMatrix::zeros(2, 2);
        let bounds = Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let mut rng = RngStream::new(5, 0);
        let draws = truncated_mvn_mixture(&elite, &cov, &bounds, 50, &mut rng);
        for d in draws {
            assert!(elite.iter().any(|e| e == &d));
        }
    }

    #[test]
    fn sample_covariance_matches_component_covariance() {
        let elite = vec![DVector::from_vec(vec![0.0, 0.0])];
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.5]);
        let bounds = Bounds::new(vec![-100.0, -100.0], vec![100.0, 100.0]).unwrap();
        let mut rng = RngStream::new(6, 0);
        let n = 10_000;
        let draws = truncated_mvn_mixture(&elite, &cov, &bounds, n, &mut rng);
        let mean = draws.iter().fold(DVector::zeros(2), |acc, d| acc + d) / n as f64;
        let mut sample_cov = DMatrix::zeros(2, 2);
        for d in &draws {
            let c = d - &mean;
            sample_cov += &c * c.transpose();
        }
        sample_cov /= (n - 1) as f64;
        let rel = (sample_cov - &cov).norm() / cov.norm();
        assert!(rel < 0.15, "relative error {rel}");
    }

    #[test]
    fn sliver_box_far_in_tail_still_lands_inside() {
        // Box so far from the mean that every rejection fails and the clamp
        // path is the only way in.
        let elite = vec![DVector::from_vec(vec![0.0])];
        let cov = DMatrix::from_element(1, 1, 1e-6);
        let bounds = Bounds::new(vec![50.0], vec![50.001]).unwrap();
        let mut rng = RngStream::new(7, 0);
        let draws = truncated_mvn_mixture(&elite, &cov, &bounds, 10, &mut rng);
        for d in &draws {
            assert!(bounds.contains(d.as_slice()));
        }
    }

    #[test]
    fn outputs_always_in_bounds() {
        let elite = vec![
            DVector::from_vec(vec![0.05, 0.95]),
            DVector::from_vec(vec![0.9, 0.1]),
        ];
        let cov = DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.3]);
        let bounds = Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let mut rng = RngStream::new(8, 0);
        for d in truncated_mvn_mixture(&elite, &cov, &bounds, 500, &mut rng) {
            assert!(bounds.contains(d.as_slice()));
        }
    }
}
