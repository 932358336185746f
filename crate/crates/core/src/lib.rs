//! Exact and learned solvers for two-stage stochastic application placement
//! on edge servers.
//!
//! The pipeline: [`world`] defines the problem datum (grid, users, servers,
//! movement scenarios), [`model`] encodes the two-stage program and its
//! constraints, [`solver`] solves it exactly by branch-and-bound, [`dataset`]
//! turns solved instances into supervised-learning records, and [`learn`]
//! trains SVM and MLP surrogates that imitate the solver's first-stage
//! allocation at a fraction of its cost.
//!
//! All numeric code is generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the aliases below pin the common double-precision
//! instantiation.

pub mod dataset;
pub mod error;
pub mod learn;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod world;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision problem datum.
pub type Instance64 = world::Instance<f64>;
/// Double-precision model constants.
pub type ModelConstants64 = world::ModelConstants<f64>;
/// Double-precision solve outcome.
pub type SolveResult64 = solver::SolveResult<f64>;
/// Double-precision training record.
pub type Record64 = dataset::Record<f64>;
/// Double-precision dataset.
pub type Dataset64 = dataset::Dataset<f64>;
/// Double-precision one-vs-one SVM.
pub type SvmOvO64 = learn::SvmOvO<f64>;
/// Double-precision MLP classifier.
pub type MlpModel64 = learn::MlpModel<f64>;
