//! Order statistics and inequality measures.

use crate::error::{Error, Result};

/// Quantiles by order-statistic interpolation: index `h = (n-1)p + 1`
/// (one-based), linear between neighbors. `ps` must be sorted and in (0,1).
pub fn quantile(sample: &[f64], ps: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("quantile of an empty sample".into()));
    }
    for w in ps.windows(2) {
        if w[0] > w[1] {
            return Err(Error::InvalidInput("quantile levels must be sorted".into()));
        }
    }
    if ps.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::InvalidInput("quantile levels must lie in (0,1)".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(ps
        .iter()
        .map(|&p| {
            let h = (n - 1) as f64 * p;
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            if lo + 1 < n {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            } else {
                sorted[lo]
            }
        })
        .collect())
}

/// Sorted-sample median (mean of the two central order statistics for even n).
pub fn median(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("median of an empty sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Gini index of a nonnegative abundance vector:
/// `G = sum_ij |a_i - a_j| / (2 m sum_k a_k)` with `m` the species count.
pub fn gini(abundances: &[f64]) -> Result<f64> {
    if abundances.is_empty() {
        return Err(Error::InvalidInput("gini of an empty vector".into()));
    }
    if abundances.iter().any(|&a| a < 0.0 || !a.is_finite()) {
        return Err(Error::InvalidInput("gini requires finite nonnegative abundances".into()));
    }
    let total: f64 = abundances.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("gini of an all-zero vector".into()));
    }
    let mut sorted = abundances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    // sum_ij |a_i - a_j| = 2 * sum_i (2i - m - 1) a_(i), one-based ranks.
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &a)| (2.0 * (i + 1) as f64 - m - 1.0) * a)
        .sum();
    Ok(weighted / (m * total))
}
