//! Least-squares fitting of clamped B-spline curves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mathkit::linalg::SpdFactor;

/// Clamped knot vector: the domain endpoints repeated `degree + 1` times
/// around the interior knots.
fn clamped_knots(degree: usize, interior: &[f64], domain: (f64, f64)) -> Vec<f64> {
    let mut knots = vec![domain.0; degree + 1];
    knots.extend_from_slice(interior);
    knots.extend(std::iter::repeat_n(domain.1, degree + 1));
    knots
}

/// All basis function values at `t` by the Cox-de Boor recursion.
fn basis_row(knots: &[f64], degree: usize, n_basis: usize, t: f64) -> Vec<f64> {
    let mut values = vec![0.0; n_basis];
    // Locate the knot span, treating the right endpoint as inside the last span.
    let last = knots.len() - degree - 2;
    let span = if t >= knots[last + 1] {
        last
    } else {
        let mut s = degree;
        while s < last && t >= knots[s + 1] {
            s += 1;
        }
        s
    };

    // Nonzero basis functions on the span (The NURBS Book, A2.2).
    let mut nz = vec![0.0; degree + 1];
    nz[0] = 1.0;
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    for j in 1..=degree {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom != 0.0 { nz[r] / denom } else { 0.0 };
            nz[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        nz[j] = saved;
    }
    for (r, &v) in nz.iter().enumerate() {
        let idx = span - degree + r;
        if idx < n_basis {
            values[idx] = v;
        }
    }
    values
}

/// Least-squares coefficients of a clamped B-spline fitted to
/// `(times, values)`. A rank-deficient basis (all observations in one span)
/// falls back to the ridge policy of the normal-equation solve.
pub fn bspline_ls(
    times: &[f64],
    values: &[f64],
    degree: usize,
    interior_knots: &[f64],
    domain: (f64, f64),
) -> Result<Vec<f64>> {
    if times.len() != values.len() {
        return Err(Error::InvalidInput("times and values differ in length".into()));
    }
    let knots = clamped_knots(degree, interior_knots, domain);
    let n_basis = knots.len() - degree - 1;
    if times.len() < n_basis {
        return Err(Error::InvalidInput(format!(
            "need at least {n_basis} observations to fit {n_basis} coefficients, got {}",
            times.len()
        )));
    }

    let n = times.len();
    let basis = DMatrix::from_fn(n, n_basis, |i, j| basis_row(&knots, degree, n_basis, times[i])[j]);
    let y = DVector::from_column_slice(values);
    let btb = basis.transpose() * &basis;
    let bty = basis.transpose() * y;
    let factor = SpdFactor::new(&btb, "B-spline normal equations")?;
    Ok(factor.solve_vec(&bty).iter().copied().collect())
}
