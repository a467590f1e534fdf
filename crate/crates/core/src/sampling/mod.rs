//! Stochastic draws: reproducible streams, Latin hypercube initialization,
//! truncated normal mixtures, ellipsoid sampling, and stable variates.

mod ellipsoid;
mod lhs;
mod mvn;
mod stable;
mod stream;

pub use ellipsoid::ellipsoid_box_uniform;
pub use lhs::latin_hypercube;
pub use mvn::truncated_mvn_mixture;
pub use stable::alpha_stable;
pub use stream::RngStream;
