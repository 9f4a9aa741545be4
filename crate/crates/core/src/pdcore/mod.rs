//! Symmetric / positive-definite linear algebra and special functions.

mod cholesky;
mod interval;
mod matrix;
mod special;
mod stats;

pub use cholesky::{cholesky_logdet, is_pd, pd_inverse, Cholesky};
pub use interval::{pd_interval, Interval};
pub use matrix::SymMatrix;
pub use special::{digamma, log_add_exp, log_gamma, log_multivariate_gamma, log_sum_exp};
pub(crate) use special::{digamma_pos, ln_gamma_pos};
pub use stats::{gaussian_loglik, SampleStats};
pub(crate) use stats::{scatter_of, shape};
