use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::density::{penalty_gl1, penalty_gl12};
use super::{Kind, Partition, PenaltyConfig, Wishart};
use crate::error::{Error, Result};

/// Importance-sampling estimate of a log normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogzEstimate {
    pub logz_hat: f64,
    /// Delta-method standard error of `logz_hat`.
    pub std_err: f64,
    /// Kish effective sample size of the normalized weights.
    pub ess: f64,
    pub n_samples: usize,
    pub dof: f64,
}

/// Estimates `ln Z` with a Wishart(I, D) proposal.
///
/// The weight variance is finite only when `λ_D > 1/4`; below that the
/// estimate is consistent but its standard error is unreliable.
pub fn estimate_logz_is(
    p: &Partition,
    c: &PenaltyConfig,
    kind: Kind,
    n_samples: usize,
    seed: u64,
) -> Result<LogzEstimate> {
    estimate_logz_is_with_dof(p, c, kind, n_samples, seed, p.dim() as f64)
}

pub fn estimate_logz_is_with_dof(
    p: &Partition,
    c: &PenaltyConfig,
    kind: Kind,
    n_samples: usize,
    seed: u64,
    dof: f64,
) -> Result<LogzEstimate> {
    if n_samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "importance sampling needs at least 1000 samples, got {n_samples}"
        )));
    }
    let proposal = Wishart::identity_scale(p.dim(), dof)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log_w = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let x = proposal.sample(&mut rng);
        let lq = proposal.log_density(&x);
        if !lq.is_finite() {
            continue;
        }
        let penalty = match kind {
            Kind::Gl1 => penalty_gl1(&x, p, c),
            Kind::Gl12 => penalty_gl12(&x, p, c),
        };
        log_w.push(-penalty - lq);
    }
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::EstimationFailed("all importance weights are zero or non-finite".into()));
    }
    let n = n_samples as f64;
    // samples that fell outside the cone carry zero weight
    let w: Vec<f64> = log_w.iter().map(|lw| (lw - m).exp()).collect();
    let sum: f64 = w.iter().sum();
    let sum_sq: f64 = w.iter().map(|v| v * v).sum();
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(LogzEstimate {
        logz_hat: m + mean.ln(),
        std_err: (var / n).sqrt() / mean,
        ess: sum * sum / sum_sq,
        n_samples,
        dof,
    })
}
