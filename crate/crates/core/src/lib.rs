//! Simulation-based fitting of generative models with intractable
//! likelihoods.
//!
//! The engine estimates parameters by matching observed summary statistics
//! to their simulated expectation. A global phase explores the parameter
//! box with an elite-sample population scheme; a local phase refines the
//! solution with a trust-region quasi-likelihood iteration driven by local
//! linear regression on the accumulated simulations. Both phases share one
//! append-only archive of simulated pairs, so every draw keeps informing
//! later iterations.

pub mod archive;
pub mod bounds;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod global;
pub mod harness;
pub mod local;
pub mod mathkit;
pub mod models;
pub mod result;
pub mod sampling;
pub mod simulator;

pub use archive::SimArchive;
pub use bounds::Bounds;
pub use config::{Config, ModelCheckCenter};
pub use diagnostics::Diagnostics;
pub use error::{Error, Result};
pub use harness::{benchmark, fit, mc_error_study, BenchmarkReport, McErrorReport};
pub use result::{FitResult, PartialFit, Phase, TraceRecord};
pub use sampling::RngStream;
pub use simulator::Simulator;
