use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Partition, PenaltyConfig};
use crate::pdcore::SymMatrix;

/// How penalty levels relate to the solver objective
/// `log det Ω - tr(ΩS) - Σ_{i,j} w_ij |Ω_ij|` (full double sum over entries).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyScale {
    /// Penalties are the `w_ij` of the objective directly (the "absorbed" reading).
    #[default]
    Objective,
    /// Penalties are prior rates on the upper triangle, added to the
    /// `N/2`-scaled log likelihood. Dividing through by `N/2` gives
    /// `w_ii = 2 λ_ii / N` and `w_ij = λ_ij / N` for `i != j`.
    Prior,
}

/// A between-group block penalized by its Frobenius norm. The block stands
/// for both `Ω[rows, cols]` and its transpose, so its contribution to the
/// objective is `2 weight ‖Ω[rows, cols]‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub weight: f64,
}

/// Objective-scale penalty weights: elementwise ℓ1 weights plus ℓ2 blocks.
/// Entries covered by a block carry no elementwise weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWeights {
    pub(crate) entry: SymMatrix,
    pub(crate) blocks: Vec<Block>,
    /// `block_of[i * d + j]` is the block index covering `(i, j)`.
    pub(crate) block_of: Vec<Option<usize>>,
}

impl PenaltyWeights {
    /// Elementwise ℓ1 weights.
    pub fn elementwise(penalties: &SymMatrix, scale: PenaltyScale, n: usize) -> Result<Self> {
        penalties.check_finite()?;
        let d = penalties.dim();
        for i in 0..d {
            for j in i..d {
                if penalties.get(i, j) < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "penalty ({i}, {j}) is negative: {}",
                        penalties.get(i, j)
                    )));
                }
            }
        }
        let (diag_f, off_f) = factors(scale, n)?;
        let entry = SymMatrix::from_upper_fn(d, |i, j| {
            penalties.get(i, j) * if i == j { diag_f } else { off_f }
        });
        Ok(Self {
            entry,
            blocks: Vec::new(),
            block_of: vec![None; d * d],
        })
    }

    /// Group ℓ1,2 weights: ℓ1 on the diagonal and within groups, one ℓ2
    /// block per pair of groups with level `λ_0 C_kl`.
    pub fn group(p: &Partition, c: &PenaltyConfig, scale: PenaltyScale, n: usize) -> Result<Self> {
        let d = p.dim();
        let (diag_f, off_f) = factors(scale, n)?;
        let entry = SymMatrix::from_upper_fn(d, |i, j| {
            if i == j {
                c.lambda_d * diag_f
            } else if p.same_group(i, j) {
                c.lambda_1 * off_f
            } else {
                0.0
            }
        });
        let mut blocks = Vec::new();
        let mut block_of = vec![None; d * d];
        for k in 0..p.k() {
            for l in (k + 1)..p.k() {
                let rows = p.members(k);
                let cols = p.members(l);
                let idx = blocks.len();
                for &i in &rows {
                    for &j in &cols {
                        block_of[i * d + j] = Some(idx);
                        block_of[j * d + i] = Some(idx);
                    }
                }
                blocks.push(Block {
                    rows,
                    cols,
                    weight: c.lambda_0 * p.c_kl(k, l) as f64 * off_f,
                });
            }
        }
        Ok(Self {
            entry,
            blocks,
            block_of,
        })
    }

    pub fn dim(&self) -> usize {
        self.entry.dim()
    }

    pub fn entry_weights(&self) -> &SymMatrix {
        &self.entry
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    #[inline]
    pub(crate) fn block_at(&self, i: usize, j: usize) -> Option<usize> {
        self.block_of[i * self.dim() + j]
    }

    /// `Σ_{i,j} w_ij |Ω_ij| + Σ_b 2 w_b ‖Ω_b‖`.
    pub fn penalty(&self, omega: &SymMatrix) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            s += self.entry.get(i, i) * omega.get(i, i).abs();
            for j in (i + 1)..d {
                if self.block_at(i, j).is_none() {
                    s += 2.0 * self.entry.get(i, j) * omega.get(i, j).abs();
                }
            }
        }
        for b in &self.blocks {
            s += 2.0 * b.weight * block_norm(omega, b);
        }
        s
    }

    /// Smallest diagonal weight (used to decide whether the problem is bounded).
    pub(crate) fn min_diag(&self) -> f64 {
        self.entry.diagonal().into_iter().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn block_norm(m: &SymMatrix, b: &Block) -> f64 {
    let mut s = 0.0;
    for &i in &b.rows {
        for &j in &b.cols {
            s += m.get(i, j).powi(2);
        }
    }
    s.sqrt()
}

fn factors(scale: PenaltyScale, n: usize) -> Result<(f64, f64)> {
    match scale {
        PenaltyScale::Objective => Ok((1.0, 1.0)),
        PenaltyScale::Prior => {
            if n == 0 {
                return Err(Error::InvalidInput("prior-scaled penalties need N > 0".into()));
            }
            let n = n as f64;
            Ok((2.0 / n, 1.0 / n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_scaling() {
        let lam = SymMatrix::from_upper_fn(2, |i, j| if i == j { 0.4 } else { 2.0 });
        let w = PenaltyWeights::elementwise(&lam, PenaltyScale::Prior, 4).unwrap();
        assert_eq!(w.entry.get(0, 0), 0.2);
        assert_eq!(w.entry.get(0, 1), 0.5);
        // objective-scale penalty equals (2/N) times the upper-triangle prior penalty
        let omega = SymMatrix::from_rows(&[vec![1.0, -0.3], vec![-0.3, 2.0]]).unwrap();
        let prior = 0.4 * 3.0 + 2.0 * 0.3;
        assert!((w.penalty(&omega) - 2.0 / 4.0 * prior).abs() < 1e-15);
    }

    #[test]
    fn group_blocks_cover_between_entries() {
        let p = Partition::from_labels(&[1, 1, 2, 3]).unwrap();
        let c = PenaltyConfig::new(1.0, 0.5, 2.0, 1.0).unwrap();
        let w = PenaltyWeights::group(&p, &c, PenaltyScale::Objective, 1).unwrap();
        assert_eq!(w.blocks.len(), 3);
        assert_eq!(w.blocks[0].weight, 4.0);
        assert_eq!(w.blocks[2].weight, 2.0);
        assert_eq!(w.block_at(0, 1), None);
        assert_eq!(w.block_at(3, 1), Some(1));
        assert_eq!(w.entry.get(0, 2), 0.0);
    }

    #[test]
    fn negative_penalty_rejected() {
        let lam = SymMatrix::from_upper_fn(2, |i, j| if i == j { 1.0 } else { -0.1 });
        assert!(PenaltyWeights::elementwise(&lam, PenaltyScale::Objective, 1).is_err());
    }
}
