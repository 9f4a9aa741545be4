//! Feasible range of a single entry of a PD matrix.
//!
//! With every other entry held fixed, `det X` is linear in a diagonal entry
//! and quadratic in an off-diagonal one, so the set of values keeping `X` in
//! the PD cone is an open interval. The endpoints are read off the Schur
//! complement of the remaining principal block:
//!
//! ```text
//! diagonal (i,i):      X PD  <=>  A PD and t > u^T A^{-1} u
//! off-diagonal (i,j):  X PD  <=>  A PD, s_i > 0, s_j > 0 and |t - c| < sqrt(s_i s_j)
//!     s_i = X_ii - u_i^T A^{-1} u_i,   c = u_i^T A^{-1} u_j
//! ```
//!
//! where `A` is `X` with the rows/columns of the free entry removed.

use super::{Cholesky, SymMatrix};
use crate::error::{Error, Result};

/// Open interval `(lo, hi)`; `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Interval of values `t` for which `X` with `X_ij = X_ji = t` is PD.
/// The current value of entry `(i, j)` is ignored.
pub fn pd_interval(x: &SymMatrix, i: usize, j: usize) -> Result<Interval> {
    let d = x.dim();
    if i >= d || j >= d {
        return Err(Error::InvalidInput(format!(
            "entry ({i}, {j}) out of range for dimension {d}"
        )));
    }
    x.check_finite()?;
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        let rest: Vec<usize> = (0..d).filter(|&k| k != i).collect();
        let u: Vec<f64> = rest.iter().map(|&k| x.get(i, k)).collect();
        let q = quad_forms(x, &rest, &[&u])?;
        Ok(Interval {
            lo: q[0][0],
            hi: f64::INFINITY,
        })
    } else {
        let rest: Vec<usize> = (0..d).filter(|&k| k != i && k != j).collect();
        let ui: Vec<f64> = rest.iter().map(|&k| x.get(i, k)).collect();
        let uj: Vec<f64> = rest.iter().map(|&k| x.get(j, k)).collect();
        let q = quad_forms(x, &rest, &[&ui, &uj])?;
        let si = x.get(i, i) - q[0][0];
        let sj = x.get(j, j) - q[1][1];
        if !(si > 0.0 && sj > 0.0) {
            return Err(Error::NoInterval(format!(
                "no PD completion exists for entry ({i}, {j}) (Schur complements {si:e}, {sj:e})"
            )));
        }
        let center = q[0][1];
        let radius = (si * sj).sqrt();
        Ok(Interval {
            lo: center - radius,
            hi: center + radius,
        })
    }
}

/// Gram matrix `u_a^T A^{-1} u_b` for `A = X[rest, rest]`.
fn quad_forms(x: &SymMatrix, rest: &[usize], us: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let n = us.len();
    if rest.is_empty() {
        return Ok(vec![vec![0.0; n]; n]);
    }
    let a = x.principal(rest);
    let chol = Cholesky::factor(&a).ok_or_else(|| {
        Error::NoInterval("remaining principal submatrix is not positive definite".into())
    })?;
    let solved: Vec<Vec<f64>> = us.iter().map(|u| chol.solve(u)).collect();
    let mut out = vec![vec![0.0; n]; n];
    for a_idx in 0..n {
        for b_idx in 0..n {
            out[a_idx][b_idx] = us[a_idx]
                .iter()
                .zip(&solved[b_idx])
                .map(|(p, q)| p * q)
                .sum();
        }
    }
    Ok(out)
}
