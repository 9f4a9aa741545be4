use super::weights::{block_norm, PenaltyWeights};
use crate::pdcore::{Cholesky, SymMatrix};

/// Largest violation of the stationarity conditions of
/// `log det Ω - tr(ΩS) - pen(Ω)` at `omega`, with `G = Ω^{-1} - S`:
///
/// - elementwise entries: `|G_ij| <= w_ij` where `Ω_ij = 0`, otherwise
///   `G_ij = w_ij sign(Ω_ij)`;
/// - blocks: `‖G_b‖ <= w_b` where `Ω_b = 0`, otherwise `G_b = w_b Ω_b / ‖Ω_b‖`.
///
/// Returns `+inf` when `omega` is not PD.
pub fn kkt_residual(omega: &SymMatrix, s: &SymMatrix, w: &PenaltyWeights) -> f64 {
    let Some(c) = Cholesky::factor(omega) else {
        return f64::INFINITY;
    };
    let g = c.inverse().sub(s);
    let d = s.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            if w.block_at(i, j).is_some() {
                continue;
            }
            let r = w.entry.get(i, j);
            let x = omega.get(i, j);
            let v = if x == 0.0 {
                (g.get(i, j).abs() - r).max(0.0)
            } else {
                (g.get(i, j) - r * x.signum()).abs()
            };
            worst = worst.max(v);
        }
    }
    for b in &w.blocks {
        let norm = block_norm(omega, b);
        let v = if norm == 0.0 {
            (block_norm(&g, b) - b.weight).max(0.0)
        } else {
            let mut acc = 0.0;
            for &i in &b.rows {
                for &j in &b.cols {
                    acc += (g.get(i, j) - b.weight * omega.get(i, j) / norm).powi(2);
                }
            }
            acc.sqrt()
        };
        worst = worst.max(v);
    }
    worst
}
