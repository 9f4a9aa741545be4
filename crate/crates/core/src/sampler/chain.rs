use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::truncated::{sample_trunc_exponential, sample_trunc_hyperbolic, sample_trunc_laplace};
use crate::error::{Error, Result};
use crate::model::{Kind, Partition, PenaltyConfig};
use crate::pdcore::{is_pd, pd_interval, SymMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    /// Total sweeps, including burn-in.
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Keep every `thin`-th post-burn-in sweep.
    pub thin: usize,
    /// Visit entries in a fresh random order each sweep instead of raster order.
    pub random_order: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_sweeps: 1200,
            burn_in: 200,
            seed: 0,
            thin: 1,
            random_order: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sweeps <= self.burn_in {
            return Err(Error::InvalidInput(format!(
                "n_sweeps ({}) must exceed burn_in ({})",
                self.n_sweeps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidInput("thin must be at least 1".into()));
        }
        Ok(())
    }

    pub fn kept(&self) -> usize {
        (self.n_sweeps - self.burn_in) / self.thin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub kind: Kind,
    pub partition: Partition,
    pub n_samples: usize,
    /// Estimates of `E|X_ij|`.
    pub mean_abs: SymMatrix,
    /// Estimates of `E[X_ii]`.
    pub mean_diag: Vec<f64>,
    /// Effective sample size of each `|X_ij|` trace.
    pub ess: SymMatrix,
    /// Draws pulled off an interval endpoint by the numerical guard.
    pub nudges: usize,
    /// Narrowest conditional support seen.
    pub min_width: f64,
}

impl ChainSummary {
    pub fn overall_mean_diag(&self) -> f64 {
        self.mean_diag.iter().sum::<f64>() / self.mean_diag.len() as f64
    }

    /// Mean of `E|X_ij|` over off-diagonal pairs (within groups, between groups).
    /// A side with no pairs is NaN.
    pub fn within_between(&self) -> (f64, f64) {
        let d = self.mean_abs.dim();
        let (mut w, mut nw, mut b, mut nb) = (0.0, 0, 0.0, 0);
        for i in 0..d {
            for j in (i + 1)..d {
                if self.partition.same_group(i, j) {
                    w += self.mean_abs.get(i, j);
                    nw += 1;
                } else {
                    b += self.mean_abs.get(i, j);
                    nb += 1;
                }
            }
        }
        (w / nw as f64, b / nb as f64)
    }

    /// Sample-weighted average of several chains on the same target.
    pub fn pool(chains: &[ChainSummary]) -> Result<ChainSummary> {
        let first = chains
            .first()
            .ok_or_else(|| Error::InvalidInput("no chains to pool".into()))?;
        let d = first.mean_abs.dim();
        let total: usize = chains.iter().map(|c| c.n_samples).sum();
        let mut mean_abs = SymMatrix::zeros(d);
        let mut ess = SymMatrix::zeros(d);
        let mut mean_diag = vec![0.0; d];
        for c in chains {
            if c.partition != first.partition || c.kind != first.kind {
                return Err(Error::InvalidInput("pooled chains must share kind and partition".into()));
            }
            let w = c.n_samples as f64 / total as f64;
            mean_abs = mean_abs.add(&c.mean_abs.scale(w));
            ess = ess.add(&c.ess);
            for (m, x) in mean_diag.iter_mut().zip(&c.mean_diag) {
                *m += w * x;
            }
        }
        Ok(ChainSummary {
            kind: first.kind,
            partition: first.partition.clone(),
            n_samples: total,
            mean_abs,
            mean_diag,
            ess,
            nudges: chains.iter().map(|c| c.nudges).sum(),
            min_width: chains.iter().map(|c| c.min_width).fold(f64::INFINITY, f64::min),
        })
    }
}

/// Runs one Gibbs chain and summarizes the kept samples.
pub fn gibbs_chain(kind: Kind, p: &Partition, c: &PenaltyConfig, cfg: &ChainConfig) -> Result<ChainSummary> {
    Ok(run(kind, p, c, cfg, false)?.0)
}

/// Like [`gibbs_chain`] but also returns the kept samples.
pub fn gibbs_samples(
    kind: Kind,
    p: &Partition,
    c: &PenaltyConfig,
    cfg: &ChainConfig,
) -> Result<(ChainSummary, Vec<SymMatrix>)> {
    run(kind, p, c, cfg, true)
}

/// Independent chains with seeds `cfg.seed, cfg.seed + 1, ...`, run in parallel.
pub fn gibbs_chains(
    kind: Kind,
    p: &Partition,
    c: &PenaltyConfig,
    cfg: &ChainConfig,
    n_chains: usize,
) -> Result<Vec<ChainSummary>> {
    (0..n_chains as u64)
        .into_par_iter()
        .map(|k| {
            let cfg = ChainConfig {
                seed: cfg.seed.wrapping_add(k),
                ..cfg.clone()
            };
            gibbs_chain(kind, p, c, &cfg)
        })
        .collect()
}

struct Conditional<'a> {
    kind: Kind,
    p: &'a Partition,
    c: &'a PenaltyConfig,
}

impl Conditional<'_> {
    fn draw(&self, x: &SymMatrix, i: usize, j: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
        if i == j {
            return sample_trunc_exponential(self.c.lambda_d, lo, hi, rng);
        }
        let (gi, gj) = (self.p.group_of(i), self.p.group_of(j));
        if gi == gj {
            return sample_trunc_laplace(self.c.lambda_1, lo, hi, rng);
        }
        match self.kind {
            Kind::Gl1 => sample_trunc_laplace(self.c.lambda_0, lo, hi, rng),
            Kind::Gl12 => {
                // every other entry of the same between-group block
                let mut g2 = 0.0;
                for s in self.p.members(gi) {
                    for t in self.p.members(gj) {
                        if (s, t) != (i, j) && (t, s) != (i, j) {
                            g2 += x.get(s, t).powi(2);
                        }
                    }
                }
                let rate = self.c.lambda_0 * self.p.c_kl(gi, gj) as f64;
                sample_trunc_hyperbolic(rate, g2.sqrt(), lo, hi, rng)
            }
        }
    }
}

fn run(
    kind: Kind,
    p: &Partition,
    c: &PenaltyConfig,
    cfg: &ChainConfig,
    keep: bool,
) -> Result<(ChainSummary, Vec<SymMatrix>)> {
    cfg.validate()?;
    c.validate()?;
    let d = p.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cond = Conditional { kind, p, c };
    let mut x = SymMatrix::identity(d).scale(1.0 / c.lambda_d);
    let mut order: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();

    let m = d * (d + 1) / 2;
    let mut traces: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.kept()); m];
    let mut diag_sum = vec![0.0; d];
    let mut samples = Vec::new();
    let mut nudges = 0;
    let mut min_width = f64::INFINITY;
    let mut n_kept = 0;

    for sweep in 0..cfg.n_sweeps {
        if cfg.random_order {
            order.shuffle(&mut rng);
        }
        for &(i, j) in &order {
            let iv = pd_interval(&x, i, j)
                .map_err(|e| Error::Invariant(format!("sweep {sweep}, entry ({i}, {j}): {e}")))?;
            min_width = min_width.min(iv.width());
            let mut v = cond.draw(&x, i, j, iv.lo, iv.hi, &mut rng)?;
            let near = 1e-14;
            if v - iv.lo <= near || iv.hi - v <= near {
                let step = 1e-12 * if iv.hi.is_finite() { iv.width() } else { iv.lo.abs().max(1.0) };
                v = if v - iv.lo <= near {
                    (iv.lo + step).max(iv.lo.next_up())
                } else {
                    (iv.hi - step).min(iv.hi.next_down())
                };
                nudges += 1;
            }
            x.set(i, j, v);
        }
        if !is_pd(&x) {
            return Err(Error::Invariant(format!("state left the PD cone after sweep {sweep}")));
        }
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0 && n_kept < cfg.kept() {
            n_kept += 1;
            let mut t = 0;
            for i in 0..d {
                diag_sum[i] += x.get(i, i);
                for j in i..d {
                    traces[t].push(x.get(i, j).abs());
                    t += 1;
                }
            }
            if keep {
                samples.push(x.clone());
            }
        }
    }

    let mut mean_abs = SymMatrix::zeros(d);
    let mut ess = SymMatrix::zeros(d);
    let mut t = 0;
    for i in 0..d {
        for j in i..d {
            mean_abs.set(i, j, traces[t].iter().sum::<f64>() / n_kept as f64);
            ess.set(i, j, effective_size(&traces[t]));
            t += 1;
        }
    }
    let summary = ChainSummary {
        kind,
        partition: p.clone(),
        n_samples: n_kept,
        mean_abs,
        mean_diag: diag_sum.iter().map(|s| s / n_kept as f64).collect(),
        ess,
        nudges,
        min_width,
    };
    Ok((summary, samples))
}

/// Effective sample size by Geyer's initial positive sequence.
pub fn effective_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return n as f64;
    }
    let acf = |lag: usize| {
        xs[..n - lag]
            .iter()
            .zip(&xs[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / (n as f64 * var)
    };
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = acf(lag) + acf(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    n as f64 / tau.max(1.0 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PenaltyConfig {
        PenaltyConfig::new(0.1, 0.1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn config_validation() {
        let bad = ChainConfig {
            n_sweeps: 10,
            burn_in: 10,
            ..ChainConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(ChainConfig::default().kept(), 1000);
        let thin = ChainConfig {
            n_sweeps: 30,
            burn_in: 10,
            thin: 3,
            ..ChainConfig::default()
        };
        assert_eq!(thin.kept(), 6);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = Partition::from_labels(&[1, 1, 2]).unwrap();
        let c = ChainConfig {
            n_sweeps: 60,
            burn_in: 10,
            seed: 9,
            ..ChainConfig::default()
        };
        for kind in [Kind::Gl1, Kind::Gl12] {
            let a = gibbs_chain(kind, &p, &cfg(), &c).unwrap();
            let b = gibbs_chain(kind, &p, &cfg(), &c).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.n_samples, 50);
            assert!((0..3).all(|i| (0..3).all(|j| a.mean_abs.get(i, j) >= 0.0)));
        }
    }

    #[test]
    fn stored_samples_are_pd() {
        let p = Partition::from_labels(&[1, 2, 2, 3]).unwrap();
        let c = ChainConfig {
            n_sweeps: 80,
            burn_in: 20,
            seed: 3,
            thin: 2,
            random_order: true,
        };
        let (s, xs) = gibbs_samples(Kind::Gl12, &p, &cfg(), &c).unwrap();
        assert_eq!(xs.len(), 30);
        assert_eq!(s.n_samples, 30);
        assert!(xs.iter().all(is_pd));
    }

    #[test]
    fn ess_of_iid_and_sticky_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        use rand::Rng;
        let iid: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let e = effective_size(&iid);
        assert!(e > 3000.0 && e < 5500.0, "{e}");
        let mut ar = vec![0.0; 4000];
        for t in 1..4000 {
            ar[t] = 0.9 * ar[t - 1] + rng.random::<f64>() - 0.5;
        }
        // AR(1) with φ = 0.9: n (1 - φ) / (1 + φ) ≈ 210
        let e = effective_size(&ar);
        assert!(e > 100.0 && e < 400.0, "{e}");
    }
}
