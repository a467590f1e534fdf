use crate::sampling::RngStream;

/// Symmetric, zero-centered alpha-stable draw with stability `alpha` in
/// (0, 2] and scale `gamma_scale`, by the Chambers-Mallows-Stuck recipe.
///
/// Consumes exactly two uniforms per call: the angle first, then the
/// exponential. Callers relying on stream alignment may count on that.
pub fn alpha_stable(alpha: f64, gamma_scale: f64, rng: &mut RngStream) -> f64 {
    debug_assert!(alpha > 0.0 && alpha <= 2.0, "stability index {alpha}");
    debug_assert!(gamma_scale >= 0.0, "scale {gamma_scale}");

    let u = std::f64::consts::PI * (rng.uniform_open() - 0.5);
    let e = -rng.uniform_open().ln();

    if (alpha - 1.0).abs() < 1e-12 {
        return gamma_scale * u.tan();
    }

    let num = (alpha * u).sin();
    let den = u.cos().powf(1.0 / alpha);
    let tail = ((u - alpha * u).cos() / e).powf((1.0 - alpha) / alpha);
    gamma_scale * num / den * tail
}

#[cfg(test)]
mod tests {
    use rand::RngCore;

    use super::*;

    #[test]
    fn alpha_two_is_gaussian_with_variance_two_gamma_sq() {
        let mut rng = RngStream::new(21, 0);
        let gamma = 1.5;
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| alpha_stable(2.0, gamma, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        let expected = gamma * 2.0f64.sqrt();
        assert!(
            (sd - expected).abs() / expected < 0.03,
            "sd {sd}, expected {expected}"
        );
    }

    #[test]
    fn alpha_one_is_cauchy() {
        let mut rng = RngStream::new(22, 0);
        let n = 100_000;
        let mut abs_draws: Vec<f64> =
            (0..n).map(|_| alpha_stable(1.0, 1.0, &mut rng).abs()).collect();
        abs_draws.sort_by(f64::total_cmp);
        // The median of |Cauchy| is tan(pi/4) = 1.
        let median = abs_draws[n / 2];
        assert!((median - 1.0).abs() < 0.05, "median {median}");
    }

    #[test]
    fn symmetric_law() {
        let mut rng = RngStream::new(23, 0);
        let n = 40_000;
        let mean_sign: f64 = (0..n)
            .map(|_| alpha_stable(1.7, 2.0, &mut rng).signum())
            .sum::<f64>()
            / n as f64;
        assert!(mean_sign.abs() < 3.0 / (n as f64).sqrt(), "mean sign {mean_sign}");
    }

    #[test]
    fn draws_are_finite_across_the_parameter_range() {
        let mut rng = RngStream::new(24, 0);
        for &alpha in &[0.05, 0.3, 0.7, 1.0, 1.3, 1.7, 1.99, 2.0] {
            for _ in 0..5000 {
                let x = alpha_stable(alpha, 1.0, &mut rng);
                assert!(x.is_finite(), "alpha {alpha} produced {x}");
            }
        }
    }

    #[test]
    fn consumes_exactly_two_uniforms() {
        let base = RngStream::new(25, 0);
        let mut a = base.clone();
        let mut b = base.clone();
        alpha_stable(1.7, 1.0, &mut a);
        b.uniform();
        b.uniform();
        assert_eq!(a.next_u64(), b.next_u64());
    }
}
