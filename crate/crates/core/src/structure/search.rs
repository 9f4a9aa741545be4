use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bound::{
    elbo_gl1, objective_gl12, one_hot, update_alpha, update_phi, update_z_local, DirichletPrior, VariationalState,
};
use super::split::{propose_split, Split};
use crate::error::{Error, Result};
use crate::model::{Kind, Partition, PenaltyConfig};
use crate::pdcore::{SampleStats, SymMatrix};
use crate::solver::{fit_weighted, partial_refit_weighted, PenaltyScale, PenaltyWeights, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Exhaustive,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" => Ok(Strategy::Greedy),
            "exhaustive" => Ok(Strategy::Exhaustive),
            other => Err(Error::InvalidInput(format!("unknown search strategy `{other}`"))),
        }
    }
}

/// Search settings. Penalty levels are prior rates: the solver always runs
/// with [`PenaltyScale::Prior`] so that the bound and the fitted `Ω` agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub prior: DirichletPrior,
    pub solver: SolverOptions,
    /// Relative bound change that ends the update cycles after a split.
    pub tol: f64,
    pub max_cycles: usize,
    pub max_splits: usize,
    /// A split is accepted only if it raises the bound by more than
    /// `margin * max(1, |bound|)`.
    pub margin: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            prior: DirichletPrior::Scaled,
            solver: SolverOptions::default().with_scale(PenaltyScale::Prior),
            tol: 1e-6,
            max_cycles: 100,
            max_splits: usize::MAX,
            margin: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub step: usize,
    pub split: Option<Split>,
    pub groups: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason", content = "detail")]
pub enum Termination {
    NoImprovingSplit,
    NothingToSplit,
    MaxSplits,
    SolverFailure(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub kind: Kind,
    pub strategy: Strategy,
    pub prior: DirichletPrior,
    pub trajectory: Vec<TrajectoryStep>,
    pub final_partition: Partition,
    pub final_omega: SymMatrix,
    pub final_state: VariationalState,
    pub final_bound: f64,
    pub termination: Termination,
    /// Candidate splits that were scored, by partial or full refit.
    pub splits_evaluated: usize,
    /// Candidate splits that went through full update cycles.
    pub full_refits: usize,
    /// Largest drop of the bound seen across single coordinate updates.
    pub max_coordinate_decrease: f64,
    pub elapsed_seconds: f64,
}

/// Starts from one group and splits greedily: groups are tried in order of
/// cut value per member, and the first split that raises the bound after
/// full updates is kept.
pub fn greedy_search(stats: &SampleStats, c: &PenaltyConfig, kind: Kind, opts: &SearchOptions) -> Result<SearchReport> {
    search(stats, c, kind, Strategy::Greedy, opts)
}

/// Starts from one group; every round scores each group's split with a
/// partial refit of the rows being split, fully refits the best one and keeps
/// it if the bound rises.
pub fn exhaustive_search(
    stats: &SampleStats,
    c: &PenaltyConfig,
    kind: Kind,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    search(stats, c, kind, Strategy::Exhaustive, opts)
}

pub fn search(
    stats: &SampleStats,
    c: &PenaltyConfig,
    kind: Kind,
    strategy: Strategy,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    c.validate()?;
    opts.solver.validate()?;
    if !(opts.tol > 0.0) || opts.max_cycles == 0 || !(opts.margin >= 0.0) {
        return Err(Error::InvalidInput(format!("invalid search options: {opts:?}")));
    }
    let started = Instant::now();
    let fitter = Fitter::new(stats, c, kind, opts);
    let start = fitter.initial_state(&Partition::single_group(stats.dim));
    let mut cur = fitter.refine(None, start)?;
    let mut worst = cur.worst;
    let mut trajectory = vec![TrajectoryStep {
        step: 0,
        split: None,
        groups: cur.state.k(),
        bound: cur.bound,
    }];
    let mut full_refits = 0;
    let mut evaluated = 0;

    let termination = loop {
        if trajectory.len() > opts.max_splits {
            break Termination::MaxSplits;
        }
        let p = cur.state.map_partition();
        let proposals: Vec<Split> = (0..p.k())
            .filter(|&k| p.sizes()[k] >= 2)
            .map(|k| propose_split(&p, k, &cur.omega))
            .collect::<Result<_>>()?;
        if proposals.is_empty() {
            break Termination::NothingToSplit;
        }
        let outcome = match strategy {
            Strategy::Greedy => fitter.greedy_round(&p, proposals, &cur, &mut full_refits, &mut evaluated),
            Strategy::Exhaustive => {
                evaluated += proposals.len();
                fitter.exhaustive_round(&p, proposals, &cur, &mut full_refits)
            }
        };
        match outcome {
            Ok(Some((split, next))) => {
                worst = worst.max(next.worst);
                cur = next;
                trajectory.push(TrajectoryStep {
                    step: trajectory.len(),
                    split: Some(split),
                    groups: cur.state.k(),
                    bound: cur.bound,
                });
            }
            Ok(None) => break Termination::NoImprovingSplit,
            Err(e) => break Termination::SolverFailure(e.to_string()),
        }
    };

    Ok(SearchReport {
        kind,
        strategy,
        prior: opts.prior,
        final_partition: cur.state.map_partition(),
        final_bound: cur.bound,
        final_omega: cur.omega,
        final_state: cur.state,
        trajectory,
        termination,
        splits_evaluated: evaluated,
        full_refits,
        max_coordinate_decrease: worst,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone)]
pub(crate) struct Fitted {
    pub omega: SymMatrix,
    pub state: VariationalState,
    pub bound: f64,
    pub worst: f64,
}

pub(crate) struct Fitter<'a> {
    stats: &'a SampleStats,
    c: &'a PenaltyConfig,
    kind: Kind,
    opts: SearchOptions,
}

impl<'a> Fitter<'a> {
    pub(crate) fn new(stats: &'a SampleStats, c: &'a PenaltyConfig, kind: Kind, opts: &SearchOptions) -> Self {
        let mut opts = opts.clone();
        opts.solver.scale = PenaltyScale::Prior;
        Self { stats, c, kind, opts }
    }

    pub(crate) fn initial_state(&self, p: &Partition) -> VariationalState {
        match self.kind {
            Kind::Gl1 => VariationalState::soft_from(p, self.opts.prior, self.c.alpha_0),
            Kind::Gl12 => VariationalState::hard_from(p, self.opts.prior, self.c.alpha_0),
        }
    }

    fn weights(&self, state: &VariationalState) -> Result<PenaltyWeights> {
        let n = self.stats.n;
        match self.kind {
            Kind::Gl1 => {
                let c = self.c;
                let phi = &state.phi;
                let rates = SymMatrix::from_upper_fn(state.dim(), |i, j| {
                    if i == j {
                        c.lambda_d
                    } else {
                        let e: f64 = phi[i].iter().zip(&phi[j]).map(|(a, b)| a * b).sum();
                        e * c.lambda_1 + (1.0 - e) * c.lambda_0
                    }
                });
                PenaltyWeights::elementwise(&rates, PenaltyScale::Prior, n)
            }
            Kind::Gl12 => {
                let z = state
                    .z_hard
                    .as_ref()
                    .ok_or_else(|| Error::Invariant("group l1,2 state without hard assignment".into()))?;
                PenaltyWeights::group(z, self.c, PenaltyScale::Prior, n)
            }
        }
    }

    pub(crate) fn bound(&self, omega: &SymMatrix, state: &VariationalState) -> Result<f64> {
        match self.kind {
            Kind::Gl1 => elbo_gl1(omega, state, self.stats, self.c, self.opts.prior),
            Kind::Gl12 => {
                let z = state
                    .z_hard
                    .as_ref()
                    .ok_or_else(|| Error::Invariant("group l1,2 state without hard assignment".into()))?;
                objective_gl12(omega, z, &state.alpha, self.stats, self.c, self.opts.prior)
            }
        }
    }

    fn fit_omega(&self, state: &VariationalState, warm: Option<&SymMatrix>) -> Result<SymMatrix> {
        let w = self.weights(state)?;
        match fit_weighted(&self.stats.scatter, &w, &self.opts.solver, warm) {
            Ok(fit) => Ok(fit.omega),
            Err(Error::NotConverged { best, .. }) => Ok(*best),
            Err(e) => Err(e),
        }
    }

    /// Cycles of (Ω, α, φ or z) updates until the bound settles.
    pub(crate) fn refine(&self, warm: Option<&SymMatrix>, mut state: VariationalState) -> Result<Fitted> {
        let mut omega = self.fit_omega(&state, warm)?;
        let mut bound = self.bound(&omega, &state)?;
        let mut worst = 0.0f64;
        let mut track = |before: f64, after: f64| worst = worst.max(before - after);
        for cycle in 0..self.opts.max_cycles {
            let start = bound;
            if cycle > 0 {
                let cand = self.fit_omega(&state, Some(&omega))?;
                let b = self.bound(&cand, &state)?;
                if b >= bound {
                    omega = cand;
                    bound = b;
                }
            }
            state.alpha = update_alpha(&state.phi, self.opts.prior, self.c.alpha_0);
            let b = self.bound(&omega, &state)?;
            track(bound, b);
            bound = b;
            match self.kind {
                Kind::Gl1 => {
                    state.phi = update_phi(&state, &omega, self.c)?;
                    let b = self.bound(&omega, &state)?;
                    track(bound, b);
                    bound = b;
                }
                Kind::Gl12 => {
                    let z = state.z_hard.clone().expect("checked by bound");
                    let (z, alpha) = update_z_local(&z, &omega, &state.alpha, self.c, self.opts.prior)?;
                    state = VariationalState {
                        alpha,
                        phi: one_hot(&z),
                        z_hard: Some(z),
                    };
                    let b = self.bound(&omega, &state)?;
                    track(bound, b);
                    bound = b;
                    state.alpha = update_alpha(&state.phi, self.opts.prior, self.c.alpha_0);
                    let b = self.bound(&omega, &state)?;
                    track(bound, b);
                    bound = b;
                }
            }
            if cycle > 0 && (bound - start).abs() <= self.opts.tol * bound.abs().max(1.0) {
                break;
            }
        }
        Ok(Fitted {
            omega,
            state,
            bound,
            worst,
        })
    }

    fn improves(&self, cand: f64, cur: f64) -> bool {
        cand > cur + self.opts.margin * cur.abs().max(1.0)
    }

    fn greedy_round(
        &self,
        p: &Partition,
        mut proposals: Vec<Split>,
        cur: &Fitted,
        full_refits: &mut usize,
        evaluated: &mut usize,
    ) -> Result<Option<(Split, Fitted)>> {
        let key = |s: &Split| s.cut / p.sizes()[s.group] as f64;
        proposals.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.group.cmp(&b.group)));
        for split in proposals {
            let q = split.apply(p)?;
            *full_refits += 1;
            *evaluated += 1;
            let next = self.refine(Some(&cur.omega), self.initial_state(&q))?;
            if self.improves(next.bound, cur.bound) {
                return Ok(Some((split, next)));
            }
        }
        Ok(None)
    }

    /// Bound after a partial refit of the rows of the group being split.
    fn score(&self, p: &Partition, split: &Split, cur: &Fitted) -> Result<(f64, SymMatrix, VariationalState)> {
        let q = split.apply(p)?;
        let mut state = self.initial_state(&q);
        let w = self.weights(&state)?;
        let rows = p.members(split.group);
        let omega = match partial_refit_weighted(&cur.omega, &self.stats.scatter, &rows, &w, &self.opts.solver) {
            Ok(o) => o,
            Err(Error::NotConverged { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        if self.kind == Kind::Gl1 {
            state.phi = update_phi(&state, &omega, self.c)?;
            state.alpha = update_alpha(&state.phi, self.opts.prior, self.c.alpha_0);
        }
        Ok((self.bound(&omega, &state)?, omega, state))
    }

    fn exhaustive_round(
        &self,
        p: &Partition,
        proposals: Vec<Split>,
        cur: &Fitted,
        full_refits: &mut usize,
    ) -> Result<Option<(Split, Fitted)>> {
        let scored: Vec<(f64, SymMatrix, VariationalState)> =
            proposals.par_iter().map(|s| self.score(p, s, cur)).collect::<Result<_>>()?;
        let mut best = 0;
        for (n, s) in scored.iter().enumerate() {
            if s.0 > scored[best].0 {
                best = n;
            }
        }
        let (_, omega, state) = scored.into_iter().nth(best).expect("non-empty");
        *full_refits += 1;
        let next = self.refine(Some(&omega), state)?;
        if self.improves(next.bound, cur.bound) {
            Ok(Some((proposals[best].clone(), next)))
        } else {
            Ok(None)
        }
    }
}
