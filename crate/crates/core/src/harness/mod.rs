//! Data handling, synthetic data, cross-validation and the command line.

mod cli;
mod cv;
mod data;

pub use cv::{
    candidates, cross_validate, fit_method, fold_indices, mean_test_loglik, median, thread_pool, CvOptions, CvReport,
    Method, MethodReport, Selected,
};
pub use data::{ingest_csv, planted_precision, standardize, synth_blocks, write_matrix_csv, Dataset, SynthSpec};
pub use cli::{cli_main, RunConfig};
