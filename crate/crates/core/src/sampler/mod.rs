//! Gibbs samplers over the PD cone.
//!
//! Each entry is redrawn from its exact conditional, which lives on the
//! interval returned by [`crate::pdcore::pd_interval`]: a truncated
//! exponential on the diagonal, a truncated Laplace for elementwise-penalized
//! off-diagonal entries and a truncated hyperbolic for entries of a
//! between-group block under the group ℓ1,2 density.

mod chain;
mod truncated;

pub use chain::{effective_size, gibbs_chain, gibbs_chains, gibbs_samples, ChainConfig, ChainSummary};
pub use truncated::{sample_trunc_exponential, sample_trunc_hyperbolic, sample_trunc_laplace};
