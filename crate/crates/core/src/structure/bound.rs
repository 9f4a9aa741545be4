//! The lower bound on the log posterior and its coordinate updates.
//!
//! Model: `θ ~ Dir(a, ..., a)`, `z_i | θ ~ Cat(θ)`, `Ω | z` from the group ℓ1
//! or ℓ1,2 density (normalizer replaced by its closed-form upper bound),
//! `x_n | Ω ~ N(0, Ω^{-1})`. The variational family is `q(θ) = Dir(α)` and,
//! for group ℓ1, `q(z_i = k) = φ_ik`; group ℓ1,2 keeps hard assignments.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{log_bound_gl12, penalty_gl12, Partition, PenaltyConfig};
use crate::pdcore::{digamma_pos, ln_gamma_pos, Cholesky, SampleStats, SymMatrix};

/// Parameter of the symmetric Dirichlet prior on group weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirichletPrior {
    /// `α_0 / K`, recomputed whenever `K` changes.
    #[default]
    Scaled,
    /// `α_0` regardless of `K`.
    Literal,
}

impl DirichletPrior {
    pub fn term(self, alpha_0: f64, k: usize) -> f64 {
        match self {
            DirichletPrior::Scaled => alpha_0 / k as f64,
            DirichletPrior::Literal => alpha_0,
        }
    }
}

/// `q(θ) = Dir(alpha)` and the row-stochastic responsibilities `phi` (D × K).
/// Under group ℓ1,2 `z_hard` holds the assignment and `phi` is its one-hot
/// encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalState {
    pub alpha: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    pub z_hard: Option<Partition>,
}

impl VariationalState {
    /// Soft state with one-hot responsibilities from `p` and the optimal `α`.
    pub fn soft_from(p: &Partition, prior: DirichletPrior, alpha_0: f64) -> Self {
        let phi = one_hot(p);
        let alpha = update_alpha(&phi, prior, alpha_0);
        Self {
            alpha,
            phi,
            z_hard: None,
        }
    }

    /// Hard-assignment state with the optimal `α`.
    pub fn hard_from(p: &Partition, prior: DirichletPrior, alpha_0: f64) -> Self {
        let phi = one_hot(p);
        let alpha = update_alpha(&phi, prior, alpha_0);
        Self {
            alpha,
            phi,
            z_hard: Some(p.clone()),
        }
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 || self.alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidInput(format!("alpha must be positive: {:?}", self.alpha)));
        }
        for (i, row) in self.phi.iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            let s: f64 = row.iter().sum();
            if row.iter().any(|&x| !(x >= 0.0)) || (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("phi row {i} is not on the simplex")));
            }
        }
        if let Some(z) = &self.z_hard {
            if z.k() != k || z.dim() != self.dim() {
                return Err(Error::InvalidInput("hard assignment does not match alpha/phi".into()));
            }
        }
        Ok(())
    }

    /// Group of each variable: `z_hard` if present, else the MAP of `phi`
    /// (ties to the lowest group). Groups left empty are dropped.
    pub fn map_partition(&self) -> Partition {
        if let Some(z) = &self.z_hard {
            return z.clone();
        }
        let labels: Vec<usize> = self
            .phi
            .iter()
            .map(|row| {
                let mut best = 0;
                for (k, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = k;
                    }
                }
                best
            })
            .collect();
        Partition::from_labels(&labels).expect("non-empty")
    }
}

pub(crate) fn one_hot(p: &Partition) -> Vec<Vec<f64>> {
    (0..p.dim())
        .map(|i| {
            let mut row = vec![0.0; p.k()];
            row[p.group_of(i)] = 1.0;
            row
        })
        .collect()
}

/// `E_q[log θ_k] = ψ(α_k) - ψ(Σα)`.
pub fn expected_log_theta(alpha: &[f64]) -> Vec<f64> {
    let total = digamma_pos(alpha.iter().sum());
    alpha.iter().map(|&a| digamma_pos(a) - total).collect()
}

/// `E_q[log p(θ)] + H[q(θ)]` for a symmetric Dirichlet prior with parameter `a`.
fn dirichlet_terms(alpha: &[f64], a: f64, elog: &[f64]) -> f64 {
    let k = alpha.len() as f64;
    let prior = ln_gamma_pos(k * a) - k * ln_gamma_pos(a) + (a - 1.0) * elog.iter().sum::<f64>();
    let sum: f64 = alpha.iter().sum();
    let entropy = -ln_gamma_pos(sum)
        + alpha.iter().map(|&x| ln_gamma_pos(x)).sum::<f64>()
        - alpha.iter().zip(elog).map(|(x, e)| (x - 1.0) * e).sum::<f64>();
    prior + entropy
}

/// `α_k = a + Σ_i φ_ik`, with `a` the Dirichlet prior parameter for `K` groups.
pub fn update_alpha(phi: &[Vec<f64>], prior: DirichletPrior, alpha_0: f64) -> Vec<f64> {
    let k = phi.first().map_or(0, |r| r.len());
    let a = prior.term(alpha_0, k);
    let mut alpha = vec![a; k];
    for row in phi {
        for (x, v) in alpha.iter_mut().zip(row) {
            *x += v;
        }
    }
    alpha
}

fn loglik(omega: &SymMatrix, stats: &SampleStats) -> Option<f64> {
    let c = Cholesky::factor(omega)?;
    let d = stats.dim as f64;
    Some(0.5 * stats.n as f64 * (-d * (2.0 * PI).ln() + c.logdet() - omega.trace_product(&stats.scatter)))
}

fn check(omega: &SymMatrix, stats: &SampleStats, d: usize) -> Result<()> {
    if omega.dim() != stats.dim || d != stats.dim {
        return Err(Error::DimensionMismatch {
            expected: stats.dim,
            got: if omega.dim() != stats.dim { omega.dim() } else { d },
        });
    }
    Ok(())
}

/// Per-pair expected-prior contribution `log λ - λ|Ω_ij|` for both rates.
#[inline]
fn pair_terms(c: &PenaltyConfig, x: f64) -> (f64, f64) {
    let a = x.abs();
    (c.lambda_1.ln() - c.lambda_1 * a, c.lambda_0.ln() - c.lambda_0 * a)
}

/// The group ℓ1 lower bound. `-inf` if `omega` is not PD.
pub fn elbo_gl1(
    omega: &SymMatrix,
    state: &VariationalState,
    stats: &SampleStats,
    c: &PenaltyConfig,
    prior: DirichletPrior,
) -> Result<f64> {
    check(omega, stats, state.dim())?;
    state.validate()?;
    let Some(ll) = loglik(omega, stats) else {
        return Ok(f64::NEG_INFINITY);
    };
    let d = stats.dim;
    let phi = &state.phi;
    let mut prior_omega = 0.0;
    for i in 0..d {
        prior_omega += c.lambda_d.ln() - c.lambda_d * omega.get(i, i).abs();
        for j in (i + 1)..d {
            let e: f64 = phi[i].iter().zip(&phi[j]).map(|(a, b)| a * b).sum();
            let (a, b) = pair_terms(c, omega.get(i, j));
            prior_omega += -LN_2 + e * a + (1.0 - e) * b;
        }
    }
    let elog = expected_log_theta(&state.alpha);
    let mut assign = 0.0;
    for row in phi {
        for (p, e) in row.iter().zip(&elog) {
            if *p > 0.0 {
                assign += p * (e - p.ln());
            }
        }
    }
    let a = prior.term(c.alpha_0, state.k());
    Ok(ll + prior_omega + assign + dirichlet_terms(&state.alpha, a, &elog))
}

/// The group ℓ1,2 bound with hard assignments `z`.
pub fn objective_gl12(
    omega: &SymMatrix,
    z: &Partition,
    alpha: &[f64],
    stats: &SampleStats,
    c: &PenaltyConfig,
    prior: DirichletPrior,
) -> Result<f64> {
    check(omega, stats, z.dim())?;
    if alpha.len() != z.k() {
        return Err(Error::DimensionMismatch {
            expected: z.k(),
            got: alpha.len(),
        });
    }
    let Some(ll) = loglik(omega, stats) else {
        return Ok(f64::NEG_INFINITY);
    };
    Ok(ll + structural_gl12(omega, z, alpha, c, prior))
}

/// Everything in the group ℓ1,2 bound except the likelihood.
fn structural_gl12(omega: &SymMatrix, z: &Partition, alpha: &[f64], c: &PenaltyConfig, prior: DirichletPrior) -> f64 {
    let elog = expected_log_theta(alpha);
    let assign: f64 = (0..z.dim()).map(|i| elog[z.group_of(i)]).sum();
    let a = prior.term(c.alpha_0, z.k());
    -penalty_gl12(omega, z, c) - log_bound_gl12(z, c) + assign + dirichlet_terms(alpha, a, &elog)
}

/// One pass of row-wise coordinate ascent on `φ`. Each row is replaced by
/// its exact maximizer given the other rows:
/// `φ_ik ∝ exp(E[log θ_k] + Σ_{j≠i} φ_jk (a_ij - b_ij))`,
/// `a_ij = log λ_1 - λ_1|Ω_ij|`, `b_ij = log λ_0 - λ_0|Ω_ij|`.
pub fn update_phi(state: &VariationalState, omega: &SymMatrix, c: &PenaltyConfig) -> Result<Vec<Vec<f64>>> {
    state.validate()?;
    let d = state.dim();
    omega.check_dim(d)?;
    let k = state.k();
    let elog = expected_log_theta(&state.alpha);
    let mut phi = state.phi.clone();
    for i in 0..d {
        let mut logits = elog.clone();
        for j in 0..d {
            if j == i {
                continue;
            }
            let (a, b) = pair_terms(c, omega.get(i, j));
            for kk in 0..k {
                logits[kk] += phi[j][kk] * (a - b);
            }
        }
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut row: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = row.iter().sum();
        for v in &mut row {
            *v /= s;
        }
        phi[i] = row;
    }
    Ok(phi)
}

/// One pass over variables, moving each `z_i` to the group that maximizes
/// [`objective_gl12`] (staying put on ties). Moves that empty a group drop
/// it, together with its `α` entry. Returns the new partition and the
/// matching (re-indexed) `α`.
pub fn update_z_local(
    z: &Partition,
    omega: &SymMatrix,
    alpha: &[f64],
    c: &PenaltyConfig,
    prior: DirichletPrior,
) -> Result<(Partition, Vec<f64>)> {
    omega.check_dim(z.dim())?;
    if alpha.len() != z.k() {
        return Err(Error::DimensionMismatch {
            expected: z.k(),
            got: alpha.len(),
        });
    }
    let mut z = z.clone();
    let mut alpha = alpha.to_vec();
    for i in 0..z.dim() {
        let mut best = (structural_gl12(omega, &z, &alpha, c, prior), z.clone(), alpha.clone());
        for k in 0..z.k() {
            if k == z.group_of(i) {
                continue;
            }
            let (cand, cand_alpha) = moved(&z, &alpha, i, k);
            let v = structural_gl12(omega, &cand, &cand_alpha, c, prior);
            if v > best.0 {
                best = (v, cand, cand_alpha);
            }
        }
        z = best.1;
        alpha = best.2;
    }
    Ok((z, alpha))
}

/// `z` with variable `i` moved to group `k`, and `α` carried over to the
/// canonical ids of the result.
fn moved(z: &Partition, alpha: &[f64], i: usize, k: usize) -> (Partition, Vec<f64>) {
    let next = z.with_move(i, k);
    let mut out = vec![0.0; next.k()];
    let mut set = vec![false; next.k()];
    for v in 0..z.dim() {
        let g = next.group_of(v);
        if set[g] {
            continue;
        }
        let old = if v == i { k } else { z.group_of(v) };
        out[g] = alpha[old];
        set[g] = true;
    }
    (next, out)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::model::{log_bound_gl1, logdens_gl1, logdens_gl12};

    fn cfg() -> PenaltyConfig {
        PenaltyConfig::new(0.5, 0.3, 2.0, 1.0).unwrap()
    }

    fn stats(d: usize, seed: u64) -> SampleStats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..d).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        SampleStats::from_rows(&rows).unwrap()
    }

    fn random_omega(d: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        let m = SymMatrix::from_upper_fn(d, |i, j| if i == j { 2.0 } else { rng.random::<f64>() - 0.5 });
        m.add_diagonal(d as f64 * 0.5)
    }

    fn random_state(d: usize, k: usize, rng: &mut ChaCha8Rng) -> VariationalState {
        let phi: Vec<Vec<f64>> = (0..d)
            .map(|_| {
                let r: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
                let s: f64 = r.iter().sum();
                r.iter().map(|x| x / s).collect()
            })
            .collect();
        let alpha = (0..k).map(|_| 0.2 + 3.0 * rng.random::<f64>()).collect();
        VariationalState {
            alpha,
            phi,
            z_hard: None,
        }
    }

    #[test]
    fn alpha_update_examples() {
        let phi = vec![vec![1.0, 0.0]; 4];
        assert_eq!(update_alpha(&phi, DirichletPrior::Literal, 1.0), vec![5.0, 1.0]);
        assert_eq!(update_alpha(&phi, DirichletPrior::Scaled, 1.0), vec![4.5, 0.5]);
        let uniform = vec![vec![1.0 / 3.0; 3]; 5];
        let a = update_alpha(&uniform, DirichletPrior::Scaled, 1.0);
        assert!(a.iter().all(|&x| (x - a[0]).abs() < 1e-15));
        let z = Partition::from_labels(&[1, 1, 2, 2]).unwrap();
        assert_eq!(update_alpha(&one_hot(&z), DirichletPrior::Literal, 1.0), vec![3.0, 3.0]);
    }

    #[test]
    fn single_group_collapses_to_penalized_likelihood() {
        let s = stats(4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let omega = random_omega(4, &mut rng);
        let p = Partition::single_group(4);
        let state = VariationalState::soft_from(&p, DirichletPrior::Scaled, 1.0);
        let direct = crate::pdcore::gaussian_loglik(&s, &omega).unwrap()
            + logdens_gl1(&omega, &p, &cfg()).unwrap()
            - log_bound_gl1(&p, &cfg());
        let got = elbo_gl1(&omega, &state, &s, &cfg(), DirichletPrior::Scaled).unwrap();
        assert!((got - direct).abs() < 1e-10);
        let hard = objective_gl12(&omega, &p, &state.alpha, &s, &cfg(), DirichletPrior::Scaled).unwrap();
        assert!((hard - got).abs() < 1e-10);
    }

    #[test]
    fn hard_gl12_matches_direct_terms() {
        let s = stats(5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let omega = random_omega(5, &mut rng);
        let z = Partition::from_labels(&[1, 2, 1, 3, 2]).unwrap();
        let alpha = vec![1.5, 2.5, 0.7];
        let elog = expected_log_theta(&alpha);
        let mut expected = crate::pdcore::gaussian_loglik(&s, &omega).unwrap()
            + logdens_gl12(&omega, &z, &cfg()).unwrap()
            - log_bound_gl12(&z, &cfg());
        expected += (0..5).map(|i| elog[z.group_of(i)]).sum::<f64>();
        expected += dirichlet_terms(&alpha, 1.0 / 3.0, &elog);
        let got = objective_gl12(&omega, &z, &alpha, &s, &cfg(), DirichletPrior::Scaled).unwrap();
        assert!((got - expected).abs() < 1e-10);
    }

    #[test]
    fn two_singletons_use_laplace_block_constant() {
        // at D = 2 with two groups the block term is log(2 / λ_0), as in the ℓ1 bound
        let z = Partition::singletons(2);
        let c = cfg();
        assert!((log_bound_gl12(&z, &c) - log_bound_gl1(&z, &c)).abs() < 1e-14);
        let s = stats(2, 5);
        let omega = SymMatrix::from_rows(&[vec![1.5, 0.2], vec![0.2, 1.0]]).unwrap();
        let alpha = vec![1.5, 1.5];
        let state = VariationalState {
            alpha: alpha.clone(),
            phi: one_hot(&z),
            z_hard: None,
        };
        let a = objective_gl12(&omega, &z, &alpha, &s, &c, DirichletPrior::Scaled).unwrap();
        let b = elbo_gl1(&omega, &state, &s, &c, DirichletPrior::Scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn elbo_is_below_true_log_joint_in_two_dimensions() {
        // with the exact normalizer and q = point masses, log p(x, Ω, z) >= elbo
        let c = PenaltyConfig::new(1.0, 1.0, 1.5, 1.0).unwrap();
        let s = stats(2, 6);
        let omega = SymMatrix::from_rows(&[vec![1.2, -0.3], vec![-0.3, 0.9]]).unwrap();
        for p in [Partition::single_group(2), Partition::singletons(2)] {
            let state = VariationalState::soft_from(&p, DirichletPrior::Scaled, 1.0);
            let elbo = elbo_gl1(&omega, &state, &s, &c, DirichletPrior::Scaled).unwrap();
            let exact = crate::model::exact_logz_2d(&c, p.k() == 1).unwrap();
            let tight = elbo + crate::model::log_bound_gl1(&p, &c) - exact;
            assert!(elbo <= tight);
        }
    }

    #[test]
    fn phi_update_is_exact_row_maximizer() {
        let s = stats(5, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = cfg();
        for _ in 0..20 {
            let omega = random_omega(5, &mut rng);
            let state = random_state(5, 3, &mut rng);
            let before = elbo_gl1(&omega, &state, &s, &c, DirichletPrior::Scaled).unwrap();
            let phi = update_phi(&state, &omega, &c).unwrap();
            let next = VariationalState { phi, ..state.clone() };
            next.validate().unwrap();
            let after = elbo_gl1(&omega, &next, &s, &c, DirichletPrior::Scaled).unwrap();
            assert!(after >= before - 1e-10);
            // last row is stationary: finite differences along simplex directions vanish
            let h = 1e-6;
            for (a, b) in [(0usize, 1usize), (1, 2), (0, 2)] {
                let mut up = next.clone();
                up.phi[4][a] += h;
                up.phi[4][b] -= h;
                let mut dn = next.clone();
                dn.phi[4][a] -= h;
                dn.phi[4][b] += h;
                let fu = elbo_gl1(&omega, &up, &s, &c, DirichletPrior::Scaled);
                let fd = elbo_gl1(&omega, &dn, &s, &c, DirichletPrior::Scaled);
                if let (Ok(fu), Ok(fd)) = (fu, fd) {
                    assert!(((fu - fd) / (2.0 * h)).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn alpha_update_is_stationary() {
        let s = stats(4, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let omega = random_omega(4, &mut rng);
        let state = random_state(4, 3, &mut rng);
        let alpha = update_alpha(&state.phi, DirichletPrior::Scaled, 1.0);
        let opt = VariationalState { alpha, ..state };
        let f0 = elbo_gl1(&omega, &opt, &s, &cfg(), DirichletPrior::Scaled).unwrap();
        for k in 0..3 {
            let h = 1e-5;
            let mut up = opt.clone();
            up.alpha[k] += h;
            let mut dn = opt.clone();
            dn.alpha[k] -= h;
            let g = (elbo_gl1(&omega, &up, &s, &cfg(), DirichletPrior::Scaled).unwrap()
                - elbo_gl1(&omega, &dn, &s, &cfg(), DirichletPrior::Scaled).unwrap())
                / (2.0 * h);
            assert!(g.abs() < 1e-6, "k={k}: {g}");
            assert!(elbo_gl1(&omega, &up, &s, &cfg(), DirichletPrior::Scaled).unwrap() <= f0);
        }
    }

    #[test]
    fn diagonal_omega_and_symmetric_alpha_give_uniform_phi() {
        let omega = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let state = VariationalState {
            alpha: vec![2.0, 2.0],
            phi: vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.5, 0.5]],
            z_hard: None,
        };
        let phi = update_phi(&state, &omega, &cfg()).unwrap();
        for row in phi {
            assert!((row[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn coupled_pair_shares_a_group() {
        let c = PenaltyConfig::new(1.0, 0.1, 10.0, 1.0).unwrap();
        let omega = SymMatrix::from_rows(&[vec![2.0, 1.2], vec![1.2, 2.0]]).unwrap();
        let mut state = VariationalState {
            alpha: vec![1.0, 1.0],
            phi: vec![vec![0.9, 0.1], vec![0.4, 0.6]],
            z_hard: None,
        };
        for _ in 0..5 {
            state.phi = update_phi(&state, &omega, &c).unwrap();
        }
        let same: f64 = state.phi[0].iter().zip(&state.phi[1]).map(|(a, b)| a * b).sum();
        assert!(same > 0.99);
    }

    #[test]
    fn z_local_moves_are_monotone_and_fix_a_stray_variable() {
        let c = PenaltyConfig::new(0.5, 0.2, 5.0, 1.0).unwrap();
        let omega = SymMatrix::from_upper_fn(6, |i, j| {
            if i == j {
                3.0
            } else if (i < 3) == (j < 3) {
                0.6
            } else {
                0.0
            }
        });
        let s = stats(6, 11);
        let truth = Partition::from_labels(&[1, 1, 1, 2, 2, 2]).unwrap();
        let stray = Partition::from_labels(&[2, 1, 1, 2, 2, 2]).unwrap();
        let alpha = update_alpha(&one_hot(&stray), DirichletPrior::Scaled, 1.0);
        let before = objective_gl12(&omega, &stray, &alpha, &s, &c, DirichletPrior::Scaled).unwrap();
        // enumeration: the planted group is the best home for variable 0
        let options: Vec<f64> = (0..stray.k())
            .map(|k| {
                let (cand, ca) = moved(&stray, &alpha, 0, k);
                objective_gl12(&omega, &cand, &ca, &s, &c, DirichletPrior::Scaled).unwrap()
            })
            .collect();
        assert!(options[1] > options[0]);
        let (z, a) = update_z_local(&stray, &omega, &alpha, &c, DirichletPrior::Scaled).unwrap();
        let after = objective_gl12(&omega, &z, &a, &s, &c, DirichletPrior::Scaled).unwrap();
        assert_eq!(z, truth);
        assert!(after > before);
        // fixed point
        let alpha = update_alpha(&one_hot(&truth), DirichletPrior::Scaled, 1.0);
        let (z2, _) = update_z_local(&truth, &omega, &alpha, &c, DirichletPrior::Scaled).unwrap();
        assert_eq!(z2, truth);
    }

    #[test]
    fn z_local_is_never_worse_than_any_single_move() {
        let s = stats(6, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = cfg();
        for _ in 0..10 {
            let omega = random_omega(6, &mut rng);
            let labels: Vec<usize> = (0..6).map(|_| rng.random_range(0..3)).collect();
            let z = Partition::from_labels(&labels).unwrap();
            let alpha: Vec<f64> = (0..z.k()).map(|_| 0.5 + rng.random::<f64>()).collect();
            let before = objective_gl12(&omega, &z, &alpha, &s, &c, DirichletPrior::Scaled).unwrap();
            let (z1, a1) = update_z_local(&z, &omega, &alpha, &c, DirichletPrior::Scaled).unwrap();
            let after = objective_gl12(&omega, &z1, &a1, &s, &c, DirichletPrior::Scaled).unwrap();
            assert!(after >= before);
            // the first variable's move was an argmax over every option
            for k in 0..z.k() {
                let (cand, ca) = moved(&z, &alpha, 0, k);
                let v = objective_gl12(&omega, &cand, &ca, &s, &c, DirichletPrior::Scaled).unwrap();
                assert!(after >= v - 1e-9);
            }
        }
    }

    #[test]
    fn moved_keeps_alpha_attached_to_groups() {
        let z = Partition::from_labels(&[1, 2, 2, 3]).unwrap();
        let alpha = vec![10.0, 20.0, 30.0];
        // emptying group 0 by moving variable 0 into group 2
        let (p, a) = moved(&z, &alpha, 0, 2);
        assert_eq!(p, Partition::from_labels(&[3, 2, 2, 3]).unwrap());
        assert_eq!(a, vec![30.0, 20.0]);
    }

    #[test]
    fn map_partition_ties_and_empty_groups() {
        let state = VariationalState {
            alpha: vec![1.0, 1.0, 1.0],
            phi: vec![vec![0.5, 0.5, 0.0], vec![0.1, 0.2, 0.7], vec![0.2, 0.2, 0.6]],
            z_hard: None,
        };
        assert_eq!(state.map_partition(), Partition::from_labels(&[1, 2, 2]).unwrap());
    }

    #[test]
    fn non_pd_is_minus_infinity() {
        let s = stats(2, 14);
        let bad = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let p = Partition::single_group(2);
        let state = VariationalState::soft_from(&p, DirichletPrior::Scaled, 1.0);
        assert_eq!(elbo_gl1(&bad, &state, &s, &cfg(), DirichletPrior::Scaled).unwrap(), f64::NEG_INFINITY);
    }
}
