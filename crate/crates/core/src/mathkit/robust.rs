//! Robust scatter estimation: MAD scales combined with the correlation
//! matrix of Gaussian rank scores.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mathkit::special::normal_quantile;
use crate::mathkit::stats::median;

/// Consistency factor making the MAD estimate the standard deviation under
/// normality.
const MAD_SCALE: f64 = 1.4826;

/// Floor applied to the eigenvalues of the rank correlation matrix.
const EIGEN_FLOOR: f64 = 1e-8;

/// Robust scatter `sigma = S R S`: `S` diagonal of scaled MADs, `R` the
/// Gaussian-rank correlation matrix after eigenvalue conditioning.
#[derive(Debug, Clone)]
pub struct RobustScatter {
    pub sigma: DMatrix<f64>,
    pub mads: DVector<f64>,
    pub rank_corr: DMatrix<f64>,
}

/// Mid-ranks (ties get the average of the tied positions), one-based.
fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        0.0
    } else {
        (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Estimate the scatter of the rows of `residuals` (N x q).
///
/// A column with zero MAD means the corresponding summary statistic carries
/// no variation; this is reported as an error naming the column.
pub fn robust_scatter(residuals: &DMatrix<f64>) -> Result<RobustScatter> {
    let n = residuals.nrows();
    let q = residuals.ncols();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "robust scatter needs at least 3 residual rows, got {n}"
        )));
    }

    let mut mads = DVector::zeros(q);
    let mut scores = DMatrix::zeros(n, q);
    let mut column = vec![0.0; n];
    for j in 0..q {
        for i in 0..n {
            column[i] = residuals[(i, j)];
        }
        let med = median(&column)?;
        let abs_dev: Vec<f64> = column.iter().map(|&x| (x - med).abs()).collect();
        let mad = MAD_SCALE * median(&abs_dev)?;
        if mad == 0.0 {
            return Err(Error::DegenerateStatistic {
                index: j,
                reason: "zero median absolute deviation (constant summary statistic)".into(),
            });
        }
        mads[j] = mad;

        let ranks = mid_ranks(&column);
        for i in 0..n {
            scores[(i, j)] = normal_quantile(ranks[i] / (n as f64 + 1.0));
        }
    }

    let mut corr = DMatrix::identity(q, q);
    for j in 0..q {
        for k in (j + 1)..q {
            let r = pearson(scores.column(j).as_slice(), scores.column(k).as_slice());
            corr[(j, k)] = r;
            corr[(k, j)] = r;
        }
    }

    // Clip eigenvalues from below and restore the unit diagonal; the
    // conditioned version enters the scatter, the raw correlation is kept.
    let mut conditioned = corr.clone();
    let eig = nalgebra::SymmetricEigen::new(conditioned.clone());
    let clipped = DVector::from_iterator(q, eig.eigenvalues.iter().map(|&l| l.max(EIGEN_FLOOR)));
    if clipped.iter().zip(eig.eigenvalues.iter()).any(|(c, e)| c != e) {
        let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        let d: Vec<f64> = (0..q).map(|i| rebuilt[(i, i)].sqrt()).collect();
        conditioned = DMatrix::from_fn(q, q, |i, j| rebuilt[(i, j)] / (d[i] * d[j]));
        for i in 0..q {
            conditioned[(i, i)] = 1.0;
        }
    }

    let s = DMatrix::from_diagonal(&mads);
    let sigma = &s * &conditioned * &s;
    Ok(RobustScatter { sigma, mads, rank_corr: corr })
}
