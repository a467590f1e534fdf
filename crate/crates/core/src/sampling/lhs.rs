use nalgebra::DVector;

use crate::bounds::Bounds;
use crate::sampling::RngStream;

/// Latin hypercube sample of `n` points: per coordinate, one point in each
/// of the `n` equal strata, jittered uniformly, with an independent stratum
/// permutation per coordinate.
pub fn latin_hypercube(n: usize, bounds: &Bounds, rng: &mut RngStream) -> Vec<DVector<f64>> {
    assert!(n >= 1, "latin hypercube needs at least one point");
    let p = bounds.dim();
    let mut points = vec![DVector::zeros(p); n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..p {
        let (lo, hi) = (bounds.lower()[j], bounds.upper()[j]);
        let width = (hi - lo) / n as f64;
        // Fisher-Yates permutation of the strata.
        for i in (1..n).rev() {
            strata.swap(i, rng.index(i + 1));
        }
        for (i, point) in points.iter_mut().enumerate() {
            let u = rng.uniform();
            point[j] = lo + (strata[i] as f64 + u) * width;
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stratum_counts(values: &[f64], lo: f64, hi: f64, n: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n];
        for &v in values {
            let k = (((v - lo) / (hi - lo) * n as f64) as usize).min(n - 1);
            counts[k] += 1;
        }
        counts
    }

    #[test]
    fn one_point_per_stratum_on_unit_square() {
        let bounds = Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let mut rng = RngStream::new(1, 0);
        let pts = latin_hypercube(4, &bounds, &mut rng);
        for j in 0..2 {
            let col: Vec<f64> = pts.iter().map(|x| x[j]).collect();
            assert_eq!(stratum_counts(&col, 0.0, 1.0, 4), vec![1, 1, 1, 1]);
        }
    }

    #[test]
    fn single_point_is_uniform_in_box() {
        let bounds = Bounds::new(vec![-2.0], vec![3.0]).unwrap();
        let mut rng = RngStream::new(2, 0);
        let pts = latin_hypercube(1, &bounds, &mut rng);
        assert_eq!(pts.len(), 1);
        assert!(bounds.contains(pts[0].as_slice()));
    }

    #[test]
    fn stratified_mean_concentrates() {
        let bounds = Bounds::new(vec![0.0], vec![10.0]).unwrap();
        let mut rng = RngStream::new(3, 0);
        let pts = latin_hypercube(1000, &bounds, &mut rng);
        let mean = pts.iter().map(|x| x[0]).sum::<f64>() / 1000.0;
        assert!((mean - 5.0).abs() < 0.35, "mean {mean}");
    }

    #[test]
    fn stratification_holds_for_larger_samples() {
        let bounds = Bounds::new(vec![1.0, -1.0, 0.0], vec![2.0, 1.0, 100.0]).unwrap();
        let mut rng = RngStream::new(4, 0);
        let n = 100;
        let pts = latin_hypercube(n, &bounds, &mut rng);
        for j in 0..3 {
            let col: Vec<f64> = pts.iter().map(|x| x[j]).collect();
            let counts = stratum_counts(&col, bounds.lower()[j], bounds.upper()[j], n);
            assert!(counts.iter().all(|&c| c == 1), "coordinate {j}: {counts:?}");
        }
    }

    #[test]
    fn deterministic_under_fixed_stream() {
        let bounds = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let a = latin_hypercube(16, &bounds, &mut RngStream::new(9, 1));
        let b = latin_hypercube(16, &bounds, &mut RngStream::new(9, 1));
        assert_eq!(a, b);
    }
}
