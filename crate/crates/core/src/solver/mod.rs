//! Penalized maximum-likelihood precision estimation for a fixed structure.
//!
//! All routines maximize `log det Ω - tr(ΩS) - pen(Ω)`, where `pen` is
//! described by [`PenaltyWeights`] on the objective scale (every entry of the
//! full matrix counted, so an off-diagonal weight `w` costs `2w|Ω_ij|`).
//! [`PenaltyScale`] converts penalty levels into those weights.

mod dual;
mod kkt;
mod partial;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{entry_penalties, Kind, Partition, PenaltyConfig};
use crate::pdcore::{Cholesky, SymMatrix};

pub use dual::duality_gap;
pub use kkt::kkt_residual;
pub use weights::{Block, PenaltyScale, PenaltyWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Duality-gap tolerance (gradient-mapping tolerance for partial refits).
    pub tol: f64,
    pub max_iter: usize,
    /// Sufficient-ascent constant of the backtracking line search.
    pub armijo: f64,
    pub scale: PenaltyScale,
    /// Keep the dual objective after every iteration in [`Fit::history`].
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 5000,
            armijo: 1e-4,
            scale: PenaltyScale::Objective,
            record_history: false,
        }
    }
}

impl SolverOptions {
    pub fn with_scale(mut self, scale: PenaltyScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::InvalidInput(format!("invalid solver options: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub omega: SymMatrix,
    /// Dual iterate `W`, the regularized covariance estimate.
    pub sigma: SymMatrix,
    pub gap: f64,
    pub iterations: usize,
    /// Primal objective at `omega`.
    pub objective: f64,
    /// Dual objective `log det W` per iteration, when requested.
    pub history: Vec<f64>,
}

/// `log det Ω - tr(ΩS) - pen(Ω)`; `-inf` outside the PD cone.
pub fn objective(omega: &SymMatrix, s: &SymMatrix, w: &PenaltyWeights) -> f64 {
    match Cholesky::factor(omega) {
        Some(c) => c.logdet() - omega.trace_product(s) - w.penalty(omega),
        None => f64::NEG_INFINITY,
    }
}

/// Closed-form `(S + λI)^{-1}`.
pub fn tikhonov(s: &SymMatrix, lam: f64) -> Result<SymMatrix> {
    s.check_finite()?;
    let shifted = s.add_diagonal(lam);
    Cholesky::factor(&shifted)
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Domain(format!("S + {lam} I is not positive definite")))
}

/// Elementwise ℓ1-penalized estimate with penalty matrix `penalties`.
pub fn fit_l1(s: &SymMatrix, penalties: &SymMatrix, n: usize, opts: &SolverOptions) -> Result<Fit> {
    let w = PenaltyWeights::elementwise(penalties, opts.scale, n)?;
    fit_weighted(s, &w, opts, None)
}

/// Group ℓ1,2-penalized estimate: ℓ1 within groups, block ℓ2 between groups.
pub fn fit_gl12(
    s: &SymMatrix,
    p: &Partition,
    c: &PenaltyConfig,
    n: usize,
    opts: &SolverOptions,
) -> Result<Fit> {
    let w = PenaltyWeights::group(p, c, opts.scale, n)?;
    fit_weighted(s, &w, opts, None)
}

/// Weights for a fixed partition under either penalty family.
pub fn weights_for(
    kind: Kind,
    p: &Partition,
    c: &PenaltyConfig,
    scale: PenaltyScale,
    n: usize,
) -> Result<PenaltyWeights> {
    match kind {
        Kind::Gl1 => PenaltyWeights::elementwise(&entry_penalties(p, c), scale, n),
        Kind::Gl12 => PenaltyWeights::group(p, c, scale, n),
    }
}

/// Full fit from an optional warm start `Ω`.
pub fn fit_weighted(
    s: &SymMatrix,
    w: &PenaltyWeights,
    opts: &SolverOptions,
    warm: Option<&SymMatrix>,
) -> Result<Fit> {
    if w.min_diag() <= 0.0 && Cholesky::factor(s).is_none() {
        return Err(Error::Domain(
            "a zero diagonal penalty needs a positive-definite S".into(),
        ));
    }
    dual::solve(s, w, opts, warm)
}

/// Re-optimizes only entries with at least one index in `rows`, starting at
/// `omega`. The objective never decreases and the result stays PD.
pub fn partial_refit(
    omega: &SymMatrix,
    s: &SymMatrix,
    rows: &[usize],
    p: &Partition,
    c: &PenaltyConfig,
    kind: Kind,
    n: usize,
    opts: &SolverOptions,
) -> Result<SymMatrix> {
    let w = weights_for(kind, p, c, opts.scale, n)?;
    partial_refit_weighted(omega, s, rows, &w, opts)
}

pub fn partial_refit_weighted(
    omega: &SymMatrix,
    s: &SymMatrix,
    rows: &[usize],
    w: &PenaltyWeights,
    opts: &SolverOptions,
) -> Result<SymMatrix> {
    partial::refit(omega, s, rows, w, opts)
}

#[cfg(test)]
mod tests;
