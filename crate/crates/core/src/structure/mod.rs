//! Block-structure learning.
//!
//! The posterior over (Ω, groups) is bounded below using the closed-form
//! normalizer bounds and a variational posterior on the group weights. The
//! search starts from a single group and grows the partition by normalized
//! cut splits, keeping a split only if the bound rises after re-fitting.

mod bound;
mod search;
mod split;

pub use bound::{
    elbo_gl1, expected_log_theta, objective_gl12, update_alpha, update_phi, update_z_local, DirichletPrior,
    VariationalState,
};
pub use search::{
    exhaustive_search, greedy_search, search, SearchOptions, SearchReport, Strategy, Termination, TrajectoryStep,
};
pub use split::{propose_split, Split};
