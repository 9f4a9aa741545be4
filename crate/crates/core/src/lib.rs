//! Sparse Gaussian precision estimation under group ℓ1 and group ℓ1,2
//! positive-definite matrix priors, with unknown block structure.
//!
//! Modules, bottom-up:
//!
//! - [`pdcore`]: symmetric/PD linear algebra, special functions, and the
//!   feasible interval of one entry of a PD matrix.
//! - [`model`]: the two matrix distributions, their normalizer bounds, the
//!   exact 2-D normalizer and an importance-sampling estimator.
//! - [`solver`]: penalized maximum likelihood for a fixed structure.
//! - [`sampler`]: Gibbs samplers over the PD cone.
//! - [`structure`]: variational lower bound and split-based structure search.
//! - [`harness`]: data handling, synthetic data, cross-validation and the CLI.

pub mod error;
pub mod harness;
pub mod model;
pub mod pdcore;
pub mod sampler;
pub mod solver;
pub mod structure;

pub use error::{Error, Result};
pub use model::{Kind, Partition, PenaltyConfig};
pub use pdcore::{SampleStats, SymMatrix};
