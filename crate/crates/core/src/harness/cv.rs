//! Five-fold cross-validation with an inner validation split for penalty
//! selection.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{standardize, Dataset};
use crate::error::{Error, Result};
use crate::model::{Kind, Partition, PenaltyConfig};
use crate::pdcore::{gaussian_loglik, SampleStats, SymMatrix};
use crate::solver::{fit_gl12, fit_l1, tikhonov, PenaltyScale, SolverOptions};
use crate::structure::{search, SearchOptions, Strategy};

/// An estimator taking part in cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// `(S + λ I)^{-1}`, one diagonal penalty.
    Tikhonov,
    /// Elementwise ℓ1 with a diagonal and a single off-diagonal level.
    IndependentL1,
    /// Group ℓ1,2 with a fixed, known partition.
    KnownGroups { partition: Partition },
    /// Structure search from one group.
    Search { kind: Kind, strategy: Strategy },
}

impl Method {
    /// Short name: `T`, `IL1`, `GL12-k`, `GL1-ug`, `GL1-ue`, `GL12-ug`, `GL12-ue`.
    pub fn name(&self) -> String {
        match self {
            Method::Tikhonov => "T".into(),
            Method::IndependentL1 => "IL1".into(),
            Method::KnownGroups { .. } => "GL12-k".into(),
            Method::Search { kind, strategy } => {
                let k = match kind {
                    Kind::Gl1 => "GL1",
                    Kind::Gl12 => "GL12",
                };
                let s = match strategy {
                    Strategy::Greedy => "ug",
                    Strategy::Exhaustive => "ue",
                };
                format!("{k}-{s}")
            }
        }
    }

    /// Parses a short name (case-insensitive). `GL12-k` needs the known
    /// partition.
    pub fn parse(name: &str, known: Option<&Partition>) -> Result<Method> {
        let lower = name.trim().to_ascii_lowercase();
        let search = |kind, strategy| Ok(Method::Search { kind, strategy });
        match lower.as_str() {
            "t" | "tikhonov" => Ok(Method::Tikhonov),
            "il1" => Ok(Method::IndependentL1),
            "gl12-k" => known
                .map(|p| Method::KnownGroups { partition: p.clone() })
                .ok_or_else(|| Error::InvalidInput("GL12-k needs a known partition".into())),
            "gl1-ug" => search(Kind::Gl1, Strategy::Greedy),
            "gl1-ue" => search(Kind::Gl1, Strategy::Exhaustive),
            "gl12-ug" => search(Kind::Gl12, Strategy::Greedy),
            "gl12-ue" => search(Kind::Gl12, Strategy::Exhaustive),
            _ => Err(Error::InvalidInput(format!("unknown method `{name}`"))),
        }
    }

    /// How many penalty levels the method selects: 1, 2 or 3.
    fn levels(&self) -> usize {
        match self {
            Method::Tikhonov => 1,
            Method::IndependentL1 => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvOptions {
    pub folds: usize,
    pub grid_points: usize,
    pub grid_max: f64,
    pub grid_min: f64,
    pub alpha_0: f64,
    pub seed: u64,
    pub solver: SolverOptions,
    pub search: SearchOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 5,
            grid_points: 10,
            grid_max: 1e4,
            grid_min: 1.0,
            alpha_0: 1.0,
            seed: 0,
            solver: SolverOptions::default().with_scale(PenaltyScale::Prior),
            search: SearchOptions::default(),
        }
    }
}

impl CvOptions {
    /// Log-spaced values from `grid_max` down to `grid_min`, both included.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        if n == 1 {
            return vec![self.grid_max];
        }
        let (a, b) = (self.grid_max.ln(), self.grid_min.ln());
        (0..n)
            .map(|k| match k {
                0 => self.grid_max,
                _ if k == n - 1 => self.grid_min,
                _ => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.folds < 2
            || self.grid_points == 0
            || !(self.grid_min > 0.0 && self.grid_max >= self.grid_min && self.grid_max.is_finite())
            || !(self.alpha_0 > 0.0)
        {
            return Err(Error::InvalidInput(format!("invalid cross-validation options: {self:?}")));
        }
        self.solver.validate()
    }
}

/// Penalties chosen on the validation split. Levels a method does not use
/// are absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selected {
    pub lambda_d: f64,
    pub lambda_1: Option<f64>,
    pub lambda_0: Option<f64>,
}

impl Selected {
    /// The chain `λ_0 > λ_1 > λ_D / 2` on the levels present.
    pub fn satisfies_constraint(&self) -> bool {
        let lower = self.lambda_1.is_none_or(|l1| l1 > 0.5 * self.lambda_d);
        let upper = match (self.lambda_1, self.lambda_0) {
            (Some(l1), Some(l0)) => l0 > l1,
            _ => true,
        };
        lower && upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    /// Mean test log likelihood per row in the original data space, per
    /// fold. `None` when the final refit failed.
    pub test_ll: Vec<Option<f64>>,
    pub validation_ll: Vec<f64>,
    pub selected: Vec<Option<Selected>>,
    /// Partition of the final model per fold, one-based labels.
    pub partitions: Vec<Option<Vec<usize>>>,
    /// Grid points whose fit failed, over all folds.
    pub grid_failures: usize,
    pub median_test_ll: Option<f64>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub seed: u64,
    pub grid: Vec<f64>,
    /// Number of `(λ_D, λ_1, λ_0)` triples satisfying the constraint chain.
    pub candidates: usize,
    /// Row indices of each test fold.
    pub folds: Vec<Vec<usize>>,
    pub methods: Vec<MethodReport>,
}

impl CvReport {
    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method.eq_ignore_ascii_case(name))
    }
}

/// Constraint-satisfying penalty candidates for a method selecting `levels`
/// values, in grid order.
pub fn candidates(grid: &[f64], levels: usize) -> Vec<Selected> {
    let mut out = Vec::new();
    for &d in grid {
        if levels == 1 {
            out.push(Selected {
                lambda_d: d,
                lambda_1: None,
                lambda_0: None,
            });
            continue;
        }
        for &l1 in grid.iter().filter(|&&l1| l1 > 0.5 * d) {
            if levels == 2 {
                out.push(Selected {
                    lambda_d: d,
                    lambda_1: Some(l1),
                    lambda_0: None,
                });
                continue;
            }
            for &l0 in grid.iter().filter(|&&l0| l0 > l1) {
                out.push(Selected {
                    lambda_d: d,
                    lambda_1: Some(l1),
                    lambda_0: Some(l0),
                });
            }
        }
    }
    out
}

/// Shuffled rows dealt round-robin into `k` folds, each sorted.
pub fn fold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Mean per-row log likelihood of `rows` in the original space, under `omega`
/// fitted on data standardized by `train`.
pub fn mean_test_loglik(train: &SampleStats, omega: &SymMatrix, rows: &[Vec<f64>]) -> Result<f64> {
    let held = train.held_out(rows)?;
    Ok((gaussian_loglik(&held, omega)? + held.log_jacobian()) / rows.len() as f64)
}

/// Fits one method at one penalty setting and returns `Ω` with its partition.
pub fn fit_method(
    method: &Method,
    stats: &SampleStats,
    sel: &Selected,
    opts: &CvOptions,
) -> Result<(SymMatrix, Option<Partition>)> {
    let d = stats.dim;
    let n = stats.n;
    let l1 = sel.lambda_1.unwrap_or(sel.lambda_d);
    let l0 = sel.lambda_0.unwrap_or(l1);
    match method {
        Method::Tikhonov => {
            let lam = match opts.solver.scale {
                PenaltyScale::Prior => 2.0 * sel.lambda_d / n as f64,
                PenaltyScale::Objective => sel.lambda_d,
            };
            Ok((tikhonov(&stats.scatter, lam)?, None))
        }
        Method::IndependentL1 => {
            let pen = SymMatrix::from_upper_fn(d, |i, j| if i == j { sel.lambda_d } else { l1 });
            Ok((fit_l1(&stats.scatter, &pen, n, &opts.solver)?.omega, None))
        }
        Method::KnownGroups { partition } => {
            if partition.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: partition.dim(),
                });
            }
            let c = PenaltyConfig::new(sel.lambda_d, l1, l0, opts.alpha_0)?;
            let fit = fit_gl12(&stats.scatter, partition, &c, n, &opts.solver)?;
            Ok((fit.omega, Some(partition.clone())))
        }
        Method::Search { kind, strategy } => {
            let c = PenaltyConfig::new(sel.lambda_d, l1, l0, opts.alpha_0)?;
            let r = search(stats, &c, *kind, *strategy, &opts.search)?;
            if let crate::structure::Termination::SolverFailure(msg) = &r.termination {
                return Err(Error::EstimationFailed(msg.clone()));
            }
            Ok((r.final_omega, Some(r.final_partition)))
        }
    }
}

/// Thread pool honouring `BLOCKPREC_THREADS` when set to a positive integer.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = std::env::var("BLOCKPREC_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if k > 0 {
            b = b.num_threads(k);
        }
    }
    b.build().map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

/// Runs the full protocol for every method. Each outer training portion is
/// split again, one fold's worth of it held out for validation; the penalty
/// with the best validation likelihood is refit on the whole training
/// portion and scored on the test fold. Every split is standardized with
/// training statistics only.
pub fn cross_validate(data: &Dataset, methods: &[Method], opts: &CvOptions) -> Result<CvReport> {
    opts.validate()?;
    if data.n() < 2 * opts.folds {
        return Err(Error::InvalidInput(format!(
            "need at least {} rows for {} folds, got {}",
            2 * opts.folds,
            opts.folds,
            data.n()
        )));
    }
    let grid = opts.grid();
    let folds = fold_indices(data.n(), opts.folds, opts.seed);
    let pool = thread_pool()?;
    let reports = pool.install(|| {
        methods
            .iter()
            .map(|m| run_method(data, m, &grid, &folds, opts))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(CvReport {
        seed: opts.seed,
        candidates: candidates(&grid, 3).len(),
        grid,
        folds,
        methods: reports,
    })
}

fn run_method(data: &Dataset, method: &Method, grid: &[f64], folds: &[Vec<usize>], opts: &CvOptions) -> Result<MethodReport> {
    let started = Instant::now();
    let cands = candidates(grid, method.levels());
    let mut report = MethodReport {
        method: method.name(),
        test_ll: Vec::new(),
        validation_ll: Vec::new(),
        selected: Vec::new(),
        partitions: Vec::new(),
        grid_failures: 0,
        median_test_ll: None,
        elapsed_seconds: 0.0,
    };
    for (f, test) in folds.iter().enumerate() {
        let mut train: Vec<usize> = (0..data.n()).filter(|i| test.binary_search(i).is_err()).collect();
        train.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed ^ (0x5eed_0000 + f as u64)));
        let n_val = (train.len() / opts.folds).max(1);
        let (val, inner) = train.split_at(n_val);
        let inner_data = data.subset(inner)?;
        let val_rows: Vec<Vec<f64>> = val.iter().map(|&i| data.rows[i].clone()).collect();
        let (_, inner_stats) = standardize(&inner_data)?;

        let scores: Vec<f64> = cands
            .par_iter()
            .map(|sel| {
                fit_method(method, &inner_stats, sel, opts)
                    .and_then(|(omega, _)| mean_test_loglik(&inner_stats, &omega, &val_rows))
                    .unwrap_or(f64::NEG_INFINITY)
            })
            .collect();
        report.grid_failures += scores.iter().filter(|s| !s.is_finite()).count();
        let mut best = None;
        for (k, &s) in scores.iter().enumerate() {
            if s.is_finite() && best.is_none_or(|b: usize| s > scores[b]) {
                best = Some(k);
            }
        }
        let Some(best) = best else {
            report.validation_ll.push(f64::NEG_INFINITY);
            report.selected.push(None);
            report.test_ll.push(None);
            report.partitions.push(None);
            continue;
        };
        let sel = cands[best];
        report.validation_ll.push(scores[best]);
        report.selected.push(Some(sel));

        let mut train_sorted = train.clone();
        train_sorted.sort_unstable();
        let (_, train_stats) = standardize(&data.subset(&train_sorted)?)?;
        let test_rows: Vec<Vec<f64>> = test.iter().map(|&i| data.rows[i].clone()).collect();
        match fit_method(method, &train_stats, &sel, opts)
            .and_then(|(omega, p)| Ok((mean_test_loglik(&train_stats, &omega, &test_rows)?, p)))
        {
            Ok((ll, p)) => {
                report.test_ll.push(Some(ll));
                report.partitions.push(p.map(|p| p.labels_one_based()));
            }
            Err(_) => {
                report.test_ll.push(None);
                report.partitions.push(None);
            }
        }
    }
    let done: Vec<f64> = report.test_ll.iter().flatten().copied().collect();
    report.median_test_ll = median(&done);
    report.elapsed_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Median of finite values; `None` if empty.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}
