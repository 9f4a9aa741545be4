use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Cholesky, SymMatrix};
use crate::error::{Error, Result};

/// Sufficient statistics of a centered Gaussian sample.
///
/// `scatter` is the 1/N sample covariance of the (possibly standardized)
/// data. `mean` and `scale` record the affine transform that produced it so
/// the same transform can be applied to held-out rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub dim: usize,
    pub scatter: SymMatrix,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub standardized: bool,
}

impl SampleStats {
    /// Stats for already-centered data with known scatter matrix.
    pub fn from_scatter(n: usize, scatter: SymMatrix) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("sample count must be positive".into()));
        }
        scatter.check_finite()?;
        let dim = scatter.dim();
        Ok(Self {
            n,
            dim,
            scatter,
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
            standardized: false,
        })
    }

    /// Centers `rows` (without scaling) and forms the 1/N scatter matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (n, dim) = shape(rows)?;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let scale = vec![1.0; dim];
        let scatter = scatter_of(rows, &mean, &scale);
        Ok(Self {
            n,
            dim,
            scatter,
            mean,
            scale,
            standardized: false,
        })
    }

    /// Applies this sample's centering/scaling to other rows.
    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let (_, dim) = shape(rows)?;
        if dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: dim,
            });
        }
        Ok(rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(self.mean.iter().zip(&self.scale))
                    .map(|(v, (m, s))| (v - m) / s)
                    .collect()
            })
            .collect())
    }

    /// Stats of `rows` after applying this sample's transform (mean is *not*
    /// re-estimated, so the scatter is about the training mean).
    pub fn held_out(&self, rows: &[Vec<f64>]) -> Result<SampleStats> {
        let z = self.transform_rows(rows)?;
        let (n, dim) = shape(&z)?;
        let scatter = scatter_of(&z, &vec![0.0; dim], &vec![1.0; dim]);
        Ok(SampleStats {
            n,
            dim,
            scatter,
            mean: self.mean.clone(),
            scale: self.scale.clone(),
            standardized: self.standardized,
        })
    }

    /// Log-Jacobian of the scaling, `-N Σ ln scale_j`; adding it to a
    /// standardized-space log likelihood gives the original-space value.
    pub fn log_jacobian(&self) -> f64 {
        -(self.n as f64) * self.scale.iter().map(|s| s.ln()).sum::<f64>()
    }
}

pub(crate) fn shape(rows: &[Vec<f64>]) -> Result<(usize, usize)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidInput("no rows".into()));
    }
    let dim = rows[0].len();
    if dim == 0 {
        return Err(Error::InvalidInput("rows have no columns".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} values, expected {dim}",
                r.len()
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("row {i} has non-finite values")));
        }
    }
    Ok((n, dim))
}

pub(crate) fn scatter_of(rows: &[Vec<f64>], mean: &[f64], scale: &[f64]) -> SymMatrix {
    let dim = mean.len();
    let n = rows.len() as f64;
    let mut s = SymMatrix::zeros(dim);
    let mut z = vec![0.0; dim];
    let mut acc = vec![0.0; dim * dim];
    for r in rows {
        for j in 0..dim {
            z[j] = (r[j] - mean[j]) / scale[j];
        }
        for i in 0..dim {
            for j in i..dim {
                acc[i * dim + j] += z[i] * z[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            s.set(i, j, acc[i * dim + j] / n);
        }
    }
    s
}

/// Gaussian log likelihood of centered data with precision `omega`:
/// `(N/2)(log det Ω - tr(ΩS) - D log 2π)`.
pub fn gaussian_loglik(stats: &SampleStats, omega: &SymMatrix) -> Result<f64> {
    omega.check_dim(stats.dim)?;
    omega.check_finite()?;
    let chol = Cholesky::factor(omega)
        .ok_or_else(|| Error::Domain("precision matrix is not positive definite".into()))?;
    let d = stats.dim as f64;
    Ok(0.5
        * stats.n as f64
        * (chol.logdet() - omega.trace_product(&stats.scatter) - d * (2.0 * PI).ln()))
}
