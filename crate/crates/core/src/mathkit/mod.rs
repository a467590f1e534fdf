//! Deterministic numerical kernels shared by both search phases.

pub mod bspline;
pub mod linalg;
pub mod lp;
pub mod regression;
pub mod robust;
pub mod special;
pub mod stats;

pub use bspline::bspline_ls;
pub use linalg::{conditioned_cholesky, mahalanobis_sq, spd_solve, SpdFactor};
pub use lp::{l1_objective, l1_trust_step};
pub use regression::{mv_least_squares, LocalLinearFit};
pub use robust::{robust_scatter, RobustScatter};
pub use special::{chisq_sf, normal_quantile};
pub use stats::{gini, median, quantile};
