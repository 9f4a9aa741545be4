//! Dual projected gradient for fixed-structure precision estimation.
//!
//! The penalty is the support function of a convex set `C`:
//! `pen(Ω) = max_{U ∈ C} tr(ΩU)`, with `C` a box on elementwise-penalized
//! entries and a Frobenius ball on each block. Swapping max and min gives
//! the dual `max_{W - S ∈ C} log det W` with `Ω = W^{-1}`, and for that pair
//! the duality gap is `tr(ΩS) + pen(Ω) - D`.

use super::kkt::kkt_residual;
use super::weights::{block_norm, PenaltyWeights};
use super::{objective, Fit, SolverOptions};
use crate::error::{Error, Result};
use crate::pdcore::{Cholesky, SymMatrix};

/// Euclidean projection of `v` onto `S + C`.
pub(crate) fn project(v: &SymMatrix, s: &SymMatrix, w: &PenaltyWeights) -> SymMatrix {
    let d = v.dim();
    let mut out = v.clone();
    for i in 0..d {
        for j in i..d {
            if w.block_at(i, j).is_some() {
                continue;
            }
            let r = w.entry.get(i, j);
            let u = (v.get(i, j) - s.get(i, j)).clamp(-r, r);
            out.set(i, j, s.get(i, j) + u);
        }
    }
    for b in &w.blocks {
        let diff = block_norm(&v.sub(s), b);
        if diff > b.weight {
            let f = if diff > 0.0 { b.weight / diff } else { 0.0 };
            for &i in &b.rows {
                for &j in &b.cols {
                    out.set(i, j, s.get(i, j) + f * (v.get(i, j) - s.get(i, j)));
                }
            }
        }
    }
    out
}

/// Duality gap between primal `omega` and dual-feasible `sigma`.
pub fn duality_gap(omega: &SymMatrix, sigma: &SymMatrix, s: &SymMatrix, w: &PenaltyWeights) -> f64 {
    let d = s.dim() as f64;
    let dual = match Cholesky::factor(sigma) {
        Some(c) => -c.logdet() - d,
        None => return f64::INFINITY,
    };
    let primal = objective(omega, s, w);
    dual - primal
}

/// Sets entries of `Ω = W^{-1}` to exactly zero where complementary
/// slackness says they vanish: the dual constraint is inactive, or the sign
/// of `Ω` disagrees with the active dual variable.
fn polish(omega: &SymMatrix, sigma: &SymMatrix, s: &SymMatrix, w: &PenaltyWeights) -> SymMatrix {
    let d = s.dim();
    let mut out = omega.clone();
    let active_tol = 1e-9;
    for i in 0..d {
        for j in (i + 1)..d {
            if w.block_at(i, j).is_some() {
                continue;
            }
            let r = w.entry.get(i, j);
            let u = sigma.get(i, j) - s.get(i, j);
            let active = r > 0.0 && u.abs() >= r * (1.0 - active_tol);
            if r > 0.0 && (!active || u * omega.get(i, j) < 0.0) {
                out.set(i, j, 0.0);
            }
        }
    }
    for b in &w.blocks {
        let u = block_norm(&sigma.sub(s), b);
        let mut inner = 0.0;
        for &i in &b.rows {
            for &j in &b.cols {
                inner += (sigma.get(i, j) - s.get(i, j)) * omega.get(i, j);
            }
        }
        if b.weight > 0.0 && (u < b.weight * (1.0 - active_tol) || inner <= 0.0) {
            for &i in &b.rows {
                for &j in &b.cols {
                    out.set(i, j, 0.0);
                }
            }
        }
    }
    out
}

pub(crate) fn solve(
    s: &SymMatrix,
    w: &PenaltyWeights,
    opts: &SolverOptions,
    warm: Option<&SymMatrix>,
) -> Result<Fit> {
    opts.validate()?;
    let d = s.dim();
    w.entry.check_dim(d)?;
    s.check_finite()?;

    let mut sigma = initial_point(s, w, warm)?;
    let mut chol = Cholesky::factor(&sigma).ok_or_else(|| {
        Error::Domain("no positive-definite starting point: S is singular and some diagonal penalty is zero".into())
    })?;
    let mut logdet = chol.logdet();
    let mut grad = chol.inverse();
    let mut history = Vec::new();
    if opts.record_history {
        history.push(logdet);
    }

    let mut step = 1.0 / grad.max_abs().max(1e-12);
    let mut prev: Option<(SymMatrix, SymMatrix)> = None;
    let mut gap = duality_gap(&grad, &sigma, s, w);
    let mut iterations = 0;
    // large penalties leave tiny entries that inflate the raw gap long after
    // the support is settled, so the polished iterate is checked as we go
    let mut certified = None;

    while gap > opts.tol && iterations < opts.max_iter {
        if iterations % 8 == 7 {
            let (o, g) = primal(&grad, &sigma, s, w, gap, opts.tol);
            if g <= opts.tol && kkt_residual(&o, s, w) <= 10.0 * opts.tol {
                certified = Some((o, g));
                break;
            }
        }
        iterations += 1;
        if let Some((ps, pg)) = &prev {
            // Barzilai–Borwein step for the concave log det
            let ds = sigma.sub(ps);
            let dg = grad.sub(pg);
            let sy = -ds.trace_product(&dg);
            let ss = ds.trace_product(&ds);
            if sy > 0.0 && ss > 0.0 {
                step = (ss / sy).clamp(1e-12, 1e12);
            }
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial = project(&sigma.add(&grad.scale(t)), s, w);
            if let Some(c) = Cholesky::factor(&trial) {
                let ld = c.logdet();
                let ascent = grad.trace_product(&trial.sub(&sigma));
                if ld >= logdet + opts.armijo * ascent && ld >= logdet {
                    accepted = Some((trial, c, ld));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, c, ld)) = accepted else {
            break;
        };
        prev = Some((sigma, grad));
        sigma = trial;
        chol = c;
        logdet = ld;
        grad = chol.inverse();
        if opts.record_history {
            history.push(logdet);
        }
        gap = duality_gap(&grad, &sigma, s, w);
    }

    let (omega, gap) = certified.unwrap_or_else(|| primal(&grad, &sigma, s, w, gap, opts.tol));
    if gap > opts.tol {
        return Err(Error::NotConverged {
            iterations,
            gap,
            best: Box::new(omega),
        });
    }
    Ok(Fit {
        objective: objective(&omega, s, w),
        omega,
        sigma,
        gap,
        iterations,
        history,
    })
}

/// The polished primal point when it is PD and certifies at least as well as
/// the raw one (`omega` with gap `raw_gap`).
fn primal(omega: &SymMatrix, sigma: &SymMatrix, s: &SymMatrix, w: &PenaltyWeights, raw_gap: f64, tol: f64) -> (SymMatrix, f64) {
    let polished = polish(omega, sigma, s, w);
    if Cholesky::factor(&polished).is_some() {
        let polished_gap = duality_gap(&polished, sigma, s, w);
        if polished_gap <= raw_gap.max(tol) {
            return (polished, polished_gap);
        }
    }
    (omega.clone(), raw_gap)
}

fn initial_point(s: &SymMatrix, w: &PenaltyWeights, warm: Option<&SymMatrix>) -> Result<SymMatrix> {
    if let Some(omega) = warm {
        omega.check_dim(s.dim())?;
        if let Some(c) = Cholesky::factor(omega) {
            let candidate = project(&c.inverse(), s, w);
            if Cholesky::factor(&candidate).is_some() {
                return Ok(candidate);
            }
        }
    }
    // S + diag(w_ii) with the off-diagonal dual variables at zero
    let d = s.dim();
    let mut sigma = s.clone();
    for i in 0..d {
        sigma.set(i, i, s.get(i, i) + w.entry.get(i, i));
    }
    Ok(sigma)
}
