use nalgebra::DMatrix;

use super::SymMatrix;
use crate::error::{Error, Result};

/// Lower Cholesky factor `L` with `X = L L^T`.
///
/// Factorization is strict: a pivot that is not strictly positive (or not
/// finite) means the matrix is outside the open PD cone. No jitter is added.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    pub fn factor(x: &SymMatrix) -> Option<Self> {
        Self::factor_dense(x.as_matrix())
    }

    pub(crate) fn factor_dense(a: &DMatrix<f64>) -> Option<Self> {
        let n = a.nrows();
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut pivot = a[(j, j)];
            for k in 0..j {
                pivot -= l[(j, k)] * l[(j, k)];
            }
            if !(pivot > 0.0) || !pivot.is_finite() {
                return None;
            }
            let ljj = pivot.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(Self { l })
    }

    pub fn factor_matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn logdet(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Solves `X x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.nrows();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.l.nrows();
        let mut linv = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            linv[(j, j)] = 1.0 / self.l[(j, j)];
            for i in (j + 1)..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= self.l[(i, k)] * linv[(k, j)];
                }
                linv[(i, j)] = s / self.l[(i, i)];
            }
        }
        SymMatrix::symmetrize_mean(linv.transpose() * linv)
    }
}

/// `(log det X, true)` when `X` is PD, `(NaN, false)` otherwise.
pub fn cholesky_logdet(x: &SymMatrix) -> Result<(f64, bool)> {
    x.check_finite()?;
    Ok(match Cholesky::factor(x) {
        Some(c) => (c.logdet(), true),
        None => (f64::NAN, false),
    })
}

pub fn is_pd(x: &SymMatrix) -> bool {
    x.is_finite() && Cholesky::factor(x).is_some()
}

/// Inverse of a PD matrix.
pub fn pd_inverse(x: &SymMatrix) -> Result<SymMatrix> {
    x.check_finite()?;
    Cholesky::factor(x)
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Domain("matrix is not positive definite".into()))
}
