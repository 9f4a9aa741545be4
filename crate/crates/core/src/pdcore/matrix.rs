use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense symmetric matrix. Every mutation writes both triangles, so the
/// stored matrix is always exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix dimension must be at least 1");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix dimension must be at least 1");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.inner[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.inner[(i, j)] = v;
                m.inner[(j, i)] = v;
            }
        }
        m
    }

    /// Parses row-major data, rejecting non-square or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "row {r} has {} entries, expected {dim}",
                    row.len()
                )));
            }
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        Self::from_dmatrix(m)
    }

    /// Wraps a square matrix, requiring symmetry to a relative 1e-10.
    /// The upper triangle is kept and mirrored.
    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dim = m.nrows();
        let scale = m.amax().max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > 1e-10 * scale && !(a.is_nan() && b.is_nan()) {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self::symmetrize_upper(m))
    }

    /// Mirrors the upper triangle onto the lower one without checking.
    pub(crate) fn symmetrize_upper(mut m: DMatrix<f64>) -> Self {
        let dim = m.nrows();
        for i in 0..dim {
            for j in (i + 1)..dim {
                m[(j, i)] = m[(i, j)];
            }
        }
        Self { inner: m }
    }

    /// Averages a nearly symmetric product back onto the cone of symmetric matrices.
    pub(crate) fn symmetrize_mean(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self {
            inner: (m + t) * 0.5,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.inner[(i, j)] = value;
        self.inner[(j, i)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    /// `trace(self * other)` for symmetric arguments, i.e. the Frobenius inner product.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        self.inner.dot(&other.inner)
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.amax()
    }

    /// Sum of `|X_ij|` over the strict upper triangle.
    pub fn offdiag_l1(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                s += self.inner[(i, j)].abs();
            }
        }
        s
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            inner: &self.inner * factor,
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix {
            inner: &self.inner - &other.inner,
        }
    }

    pub fn add_diagonal(&self, value: f64) -> SymMatrix {
        let mut m = self.clone();
        for i in 0..m.dim() {
            m.inner[(i, i)] += value;
        }
        m
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> SymMatrix {
        let n = idx.len();
        SymMatrix {
            inner: DMatrix::from_fn(n, n, |a, b| self.inner[(idx[a], idx[b])]),
        }
    }

    /// `P X P^T` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        self.principal(perm)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.inner.row(i).iter().copied().collect())
            .collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(v);
        (&self.inner * x).iter().copied().collect()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .inner
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(())
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_writes_both_triangles() {
        let mut m = SymMatrix::zeros(3);
        m.set(0, 2, 1.5);
        assert_eq!(m.get(2, 0), 1.5);
        assert_eq!(m.get(0, 2), 1.5);
    }

    #[test]
    fn asymmetric_rows_are_rejected() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let m = SymMatrix::from_rows(&[vec![2.0, -0.5], vec![-0.5, 1.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[2.0,-0.5],[-0.5,1.0]]");
        let back: SymMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
