//! Primal proximal gradient restricted to a subset of entries.
//!
//! Entries with at least one index in `rows` are free; every other entry is
//! held at its input value. Steps are accepted only when the iterate stays
//! PD and the objective does not decrease.

use super::weights::PenaltyWeights;
use super::SolverOptions;
use crate::error::{Error, Result};
use crate::pdcore::{Cholesky, SymMatrix};

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Shrink factor `s` so that `x = s v` minimizes
/// `‖x - v‖² / (2t) + w √(‖x‖² + c²)`, where `c` is the norm of the fixed
/// part of the block.
fn block_shrink(vnorm: f64, fixed_norm: f64, tw: f64) -> f64 {
    if vnorm == 0.0 {
        return 0.0;
    }
    if fixed_norm == 0.0 {
        return (1.0 - tw / vnorm).max(0.0);
    }
    // m (1 + tw / √(m² + c²)) = ‖v‖ has a unique root in [0, ‖v‖)
    let (mut lo, mut hi) = (0.0f64, vnorm);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        let lhs = m * (1.0 + tw / (m * m + fixed_norm * fixed_norm).sqrt());
        if lhs > vnorm {
            hi = m;
        } else {
            lo = m;
        }
        if hi - lo <= 1e-15 * vnorm {
            break;
        }
    }
    0.5 * (lo + hi) / vnorm
}

fn prox_step(
    omega: &SymMatrix,
    grad: &SymMatrix,
    t: f64,
    w: &PenaltyWeights,
    free: &[bool],
) -> SymMatrix {
    let d = omega.dim();
    let is_free = |i: usize, j: usize| free[i] || free[j];
    let mut out = omega.clone();
    for i in 0..d {
        for j in i..d {
            if !is_free(i, j) || w.block_at(i, j).is_some() {
                continue;
            }
            let v = omega.get(i, j) + t * grad.get(i, j);
            out.set(i, j, soft(v, t * w.entry.get(i, j)));
        }
    }
    for b in &w.blocks {
        let mut vnorm2 = 0.0;
        let mut fixed2 = 0.0;
        let mut any_free = false;
        for &i in &b.rows {
            for &j in &b.cols {
                if is_free(i, j) {
                    any_free = true;
                    vnorm2 += (omega.get(i, j) + t * grad.get(i, j)).powi(2);
                } else {
                    fixed2 += omega.get(i, j).powi(2);
                }
            }
        }
        if !any_free {
            continue;
        }
        let f = block_shrink(vnorm2.sqrt(), fixed2.sqrt(), t * b.weight);
        for &i in &b.rows {
            for &j in &b.cols {
                if is_free(i, j) {
                    out.set(i, j, f * (omega.get(i, j) + t * grad.get(i, j)));
                }
            }
        }
    }
    out
}

pub(crate) fn refit(
    omega: &SymMatrix,
    s: &SymMatrix,
    rows: &[usize],
    w: &PenaltyWeights,
    opts: &SolverOptions,
) -> Result<SymMatrix> {
    opts.validate()?;
    let d = s.dim();
    omega.check_dim(d)?;
    w.entry.check_dim(d)?;
    let mut free = vec![false; d];
    for &r in rows {
        if r >= d {
            return Err(Error::InvalidInput(format!("row {r} out of range for dimension {d}")));
        }
        free[r] = true;
    }
    let chol = Cholesky::factor(omega)
        .ok_or_else(|| Error::Domain("starting precision matrix is not positive definite".into()))?;
    if rows.is_empty() {
        return Ok(omega.clone());
    }

    let mut x = omega.clone();
    let mut inv = chol.inverse();
    let mut f = objective_with(&x, &chol, s, w);
    let mut step = 1.0;
    let mut prev: Option<(SymMatrix, SymMatrix)> = None;

    for _ in 0..opts.max_iter {
        let grad = inv.sub(s);
        if let Some((px, pg)) = &prev {
            let dx = x.sub(px);
            let dg = grad.sub(pg);
            let sy = -dx.trace_product(&dg);
            let ss = dx.trace_product(&dx);
            if sy > 0.0 && ss > 0.0 {
                step = (ss / sy).clamp(1e-12, 1e12);
            }
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial = prox_step(&x, &grad, t, w, &free);
            if let Some(c) = Cholesky::factor(&trial) {
                let ft = objective_with(&trial, &c, s, w);
                let diff = trial.sub(&x);
                // quadratic lower model of the smooth part must hold at the trial point
                let smooth_trial = c.logdet() - trial.trace_product(s);
                let smooth_x = f + w.penalty(&x);
                let model = smooth_x + grad.trace_product(&diff) - diff.trace_product(&diff) / (2.0 * t);
                if smooth_trial >= model && ft >= f {
                    accepted = Some((trial, c, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, c, ft)) = accepted else {
            return Ok(x);
        };
        let moved = trial.max_abs_diff(&x) / t;
        let gain = ft - f;
        prev = Some((x, grad));
        x = trial;
        inv = c.inverse();
        f = ft;
        if moved <= opts.tol || gain <= 1e-15 * f.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        gap: f64::NAN,
        best: Box::new(x),
    })
}

fn objective_with(x: &SymMatrix, c: &Cholesky, s: &SymMatrix, w: &PenaltyWeights) -> f64 {
    c.logdet() - x.trace_product(s) - w.penalty(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_shrink_solves_its_scalar_equation() {
        let (v, c, tw) = (2.0, 0.7, 0.9);
        let s = block_shrink(v, c, tw);
        let m = s * v;
        assert!((m * (1.0 + tw / (m * m + c * c).sqrt()) - v).abs() < 1e-12);
        assert_eq!(block_shrink(0.5, 0.0, 1.0), 0.0);
        assert!((block_shrink(2.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn objective_matches_module_objective() {
        let s = SymMatrix::identity(2);
        let w = PenaltyWeights::elementwise(
            &SymMatrix::from_upper_fn(2, |_, _| 0.1),
            super::super::PenaltyScale::Objective,
            1,
        )
        .unwrap();
        let x = SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap();
        let c = Cholesky::factor(&x).unwrap();
        assert!((objective_with(&x, &c, &s, &w) - super::super::objective(&x, &s, &w)).abs() < 1e-15);
    }
}
