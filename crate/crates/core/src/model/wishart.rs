use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::pdcore::{log_multivariate_gamma, Cholesky, SymMatrix};

/// Wishart distribution with identity scale matrix.
#[derive(Debug, Clone)]
pub struct Wishart {
    dim: usize,
    dof: f64,
    chi: Vec<ChiSquared<f64>>,
    log_norm: f64,
}

impl Wishart {
    pub fn identity_scale(dim: usize, dof: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("Wishart dimension must be positive".into()));
        }
        if !(dof > dim as f64 - 1.0) {
            return Err(Error::InvalidInput(format!(
                "Wishart degrees of freedom must exceed {} (got {dof})",
                dim - 1
            )));
        }
        let chi = (0..dim)
            .map(|i| ChiSquared::new(dof - i as f64).expect("positive dof"))
            .collect();
        let log_norm = 0.5 * dof * dim as f64 * LN_2 + log_multivariate_gamma(dim, 0.5 * dof)?;
        Ok(Self {
            dim,
            dof,
            chi,
            log_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    /// Bartlett decomposition: `X = A Aᵀ`, `A` lower triangular with
    /// `A_ii² ~ χ²(ν - i)` and standard normal entries below the diagonal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SymMatrix {
        let d = self.dim;
        let mut a = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            a[(i, i)] = self.chi[i].sample(rng).sqrt();
            for j in 0..i {
                a[(i, j)] = StandardNormal.sample(rng);
            }
        }
        SymMatrix::symmetrize_mean(&a * a.transpose())
    }

    /// Log density with respect to Lebesgue measure on the upper triangle.
    pub fn log_density(&self, x: &SymMatrix) -> f64 {
        match Cholesky::factor(x) {
            Some(ch) => {
                0.5 * (self.dof - self.dim as f64 - 1.0) * ch.logdet() - 0.5 * x.trace() - self.log_norm
            }
            None => f64::NEG_INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn moments() {
        // E[X] = ν I,  Var(X_ij) = ν for i != j
        let w = Wishart::identity_scale(3, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40_000;
        let (mut m00, mut m01, mut v01) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = w.sample(&mut rng);
            m00 += x.get(0, 0);
            m01 += x.get(0, 1);
            v01 += x.get(0, 1).powi(2);
        }
        let nf = n as f64;
        assert!((m00 / nf - 4.0).abs() < 0.1);
        assert!((m01 / nf).abs() < 0.05);
        assert!((v01 / nf - 4.0).abs() < 0.15);
    }

    #[test]
    fn one_dimensional_density_is_chi_squared() {
        // W_1(ν, 1) = χ²(ν): density x^{ν/2-1} e^{-x/2} / (2^{ν/2} Γ(ν/2))
        let w = Wishart::identity_scale(1, 3.0).unwrap();
        let x = 1.7;
        let expected = (0.5f64 * 3.0 - 1.0) * f64::ln(x) - 0.5 * x
            - 1.5 * LN_2
            - crate::pdcore::ln_gamma_pos(1.5);
        let got = w.log_density(&SymMatrix::from_diagonal(&[x]));
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn invalid_dof() {
        assert!(Wishart::identity_scale(3, 2.0).is_err());
        assert!(Wishart::identity_scale(0, 2.0).is_err());
    }
}
