use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::*;
use crate::pdcore::pd_inverse;

fn random_cov(d: usize, n: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    crate::pdcore::SampleStats::from_rows(&rows).unwrap().scatter
}

fn uniform(d: usize, diag: f64, off: f64) -> SymMatrix {
    SymMatrix::from_upper_fn(d, |i, j| if i == j { diag } else { off })
}

#[test]
fn tikhonov_examples() {
    let a = tikhonov(&SymMatrix::identity(3), 0.5).unwrap();
    assert!(a.max_abs_diff(&SymMatrix::identity(3).scale(2.0 / 3.0)) < 1e-15);
    let b = tikhonov(&SymMatrix::zeros(2), 1.0).unwrap();
    assert!(b.max_abs_diff(&SymMatrix::identity(2)) < 1e-15);
    let c = tikhonov(&SymMatrix::from_diagonal(&[1.0, 3.0]), 1.0).unwrap();
    assert!(c.max_abs_diff(&SymMatrix::from_diagonal(&[0.5, 0.25])) < 1e-15);
    assert!(matches!(tikhonov(&SymMatrix::zeros(2), 0.0), Err(Error::Domain(_))));
}

#[test]
fn diagonal_penalty_reproduces_tikhonov() {
    for seed in 0..5 {
        let s = random_cov(8, 12, seed);
        let lam = 0.3;
        let fit = fit_l1(&s, &uniform(8, lam, 0.0), 1, &SolverOptions::default()).unwrap();
        let closed = tikhonov(&s, lam).unwrap();
        assert!(fit.omega.max_abs_diff(&closed) < 1e-6, "seed {seed}");
        assert!(kkt_residual(&closed, &s, &PenaltyWeights::elementwise(&uniform(8, lam, 0.0), PenaltyScale::Objective, 1).unwrap()) < 1e-8);
    }
}

/// Dual problem at D = 2 with W_ii = S_ii fixed: maximize 1 - W12² over
/// |W12 - 0.5| <= 0.2, solved by scanning W12.
#[test]
fn two_by_two_soft_threshold() {
    let s = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=40_000 {
        let w12 = 0.3 + 0.4 * k as f64 / 40_000.0;
        let v = 1.0 - w12 * w12;
        if v > best.0 {
            best = (v, w12);
        }
    }
    let sigma = SymMatrix::from_rows(&[vec![1.0, best.1], vec![best.1, 1.0]]).unwrap();
    let expected = pd_inverse(&sigma).unwrap();
    let pen = uniform(2, 0.0, 0.2);
    let fit = fit_l1(&s, &pen, 1, &SolverOptions::default()).unwrap();
    assert!(fit.omega.max_abs_diff(&expected) < 1e-6);
    assert!((fit.omega.get(0, 0) - 1.0989).abs() < 1e-4);
    assert!((fit.omega.get(0, 1) + 0.3297).abs() < 1e-4);
    assert!((fit.sigma.get(0, 1) - 0.3).abs() < 1e-8);
}

#[test]
fn huge_penalty_gives_diagonal_estimate() {
    let s = random_cov(6, 20, 3);
    let pen = uniform(6, 0.1, 1e3 * s.max_abs());
    let fit = fit_l1(&s, &pen, 1, &SolverOptions::default()).unwrap();
    for i in 0..6 {
        for j in (i + 1)..6 {
            assert!(fit.omega.get(i, j).abs() < 1e-8);
        }
    }
}

#[test]
fn gl12_agrees_with_l1_on_singletons_and_single_group() {
    let s = random_cov(7, 15, 8);
    let c = PenaltyConfig::new(0.2, 0.1, 0.15, 1.0).unwrap();
    let opts = SolverOptions::default();
    for p in [Partition::singletons(7), Partition::single_group(7)] {
        let a = fit_gl12(&s, &p, &c, 1, &opts).unwrap();
        let b = fit_l1(&s, &entry_penalties(&p, &c), 1, &opts).unwrap();
        assert!(a.omega.max_abs_diff(&b.omega) < 1e-6);
    }
}

#[test]
fn strong_group_penalty_zeroes_whole_blocks() {
    // planted two-block covariance
    let sigma = SymMatrix::from_upper_fn(6, |i, j| {
        if i == j {
            1.0
        } else if (i < 3) == (j < 3) {
            0.5
        } else {
            0.05
        }
    });
    let p = Partition::from_labels(&[1, 1, 1, 2, 2, 2]).unwrap();
    let c = PenaltyConfig::new(0.05, 0.05, 0.2, 1.0).unwrap();
    let opts = SolverOptions::default();
    let fit = fit_gl12(&sigma, &p, &c, 1, &opts).unwrap();
    for i in 0..3 {
        for j in 3..6 {
            assert_eq!(fit.omega.get(i, j), 0.0);
        }
    }
    // block KKT at zero: ‖(Ω^{-1} - S)_block‖ <= λ_0 C_kl
    let g = pd_inverse(&fit.omega).unwrap().sub(&sigma);
    let norm: f64 = (0..3)
        .flat_map(|i| (3..6).map(move |j| (i, j)))
        .map(|(i, j)| g.get(i, j).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(norm <= 0.2 * 9.0 + 1e-9);
    assert!(fit.omega.get(0, 1).abs() > 1e-3);
    let w = PenaltyWeights::group(&p, &c, PenaltyScale::Objective, 1).unwrap();
    assert!(kkt_residual(&fit.omega, &sigma, &w) < 1e-5);
}

#[test]
fn solutions_certify() {
    let opts = SolverOptions::default();
    for seed in 0..4 {
        let s = random_cov(10, 30, 100 + seed);
        let pen = uniform(10, 0.05, 0.1);
        let fit = fit_l1(&s, &pen, 1, &opts).unwrap();
        let w = PenaltyWeights::elementwise(&pen, PenaltyScale::Objective, 1).unwrap();
        let r = kkt_residual(&fit.omega, &s, &w);
        assert!(r <= 10.0 * opts.tol, "seed {seed}: kkt {r}");
        assert!(fit.gap <= opts.tol);
        let mut bumped = fit.omega.clone();
        bumped.set(0, 1, bumped.get(0, 1) + 0.1);
        assert!(kkt_residual(&bumped, &s, &w) > opts.tol);
    }
}

#[test]
fn dual_objective_is_monotone() {
    let s = random_cov(12, 20, 42);
    let opts = SolverOptions {
        record_history: true,
        ..SolverOptions::default()
    };
    let fit = fit_l1(&s, &uniform(12, 0.1, 0.08), 1, &opts).unwrap();
    assert!(fit.history.len() > 2);
    for pair in fit.history.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12);
    }
}

#[test]
fn output_is_pd_and_penalty_monotone() {
    let opts = SolverOptions::default();
    for seed in 0..3 {
        let s = random_cov(10, 15, 500 + seed);
        let mut last = f64::INFINITY;
        for off in [0.02, 0.1, 0.3] {
            let fit = fit_l1(&s, &uniform(10, 0.1, off), 1, &opts).unwrap();
            assert!(crate::pdcore::is_pd(&fit.omega));
            let l1 = fit.omega.offdiag_l1();
            assert!(l1 <= last + 1e-6, "seed {seed}: {l1} > {last}");
            last = l1;
        }
    }
}

#[test]
fn prior_scale_matches_rescaled_objective() {
    let s = random_cov(5, 40, 9);
    let p = Partition::from_labels(&[1, 1, 2, 2, 2]).unwrap();
    let c = PenaltyConfig::new(2.0, 1.0, 4.0, 1.0).unwrap();
    let n = 40;
    let prior = fit_gl12(&s, &p, &c, n, &SolverOptions::default().with_scale(PenaltyScale::Prior)).unwrap();
    let manual = PenaltyConfig::new(2.0 * 2.0 / 40.0, 1.0 / 40.0, 4.0 / 40.0, 1.0).unwrap();
    let direct = {
        let mut w = PenaltyWeights::group(&p, &manual, PenaltyScale::Objective, 1).unwrap();
        // diagonal weight is 2λ_D/N while off-diagonal weights are λ/N
        for i in 0..5 {
            w.entry.set(i, i, 2.0 * 2.0 / 40.0);
        }
        fit_weighted(&s, &w, &SolverOptions::default(), None).unwrap()
    };
    assert!(prior.omega.max_abs_diff(&direct.omega) < 1e-6);
}

#[test]
fn partial_refit_degenerate_restrictions() {
    let s = random_cov(6, 25, 77);
    let p = Partition::from_labels(&[1, 1, 2, 2, 3, 3]).unwrap();
    let c = PenaltyConfig::new(0.1, 0.05, 0.2, 1.0).unwrap();
    let opts = SolverOptions::default();
    let start = tikhonov(&s, 0.5).unwrap();
    for kind in [Kind::Gl1, Kind::Gl12] {
        let same = partial_refit(&start, &s, &[], &p, &c, kind, 1, &opts).unwrap();
        assert_eq!(same, start);
        let all: Vec<usize> = (0..6).collect();
        let refit = partial_refit(&start, &s, &all, &p, &c, kind, 1, &opts).unwrap();
        let w = weights_for(kind, &p, &c, PenaltyScale::Objective, 1).unwrap();
        let full = fit_weighted(&s, &w, &opts, None).unwrap();
        assert!(refit.max_abs_diff(&full.omega) < 1e-5, "{kind}");
    }
}

#[test]
fn partial_refit_only_touches_selected_rows() {
    let opts = SolverOptions::default();
    for seed in 0..5 {
        let s = random_cov(7, 20, 900 + seed);
        let p = Partition::from_labels(&[1, 1, 1, 2, 2, 3, 3]).unwrap();
        let c = PenaltyConfig::new(0.1, 0.05, 0.2, 1.0).unwrap();
        let start = tikhonov(&s, 0.4).unwrap();
        let rows = [1usize, 4];
        for kind in [Kind::Gl1, Kind::Gl12] {
            let w = weights_for(kind, &p, &c, PenaltyScale::Objective, 1).unwrap();
            let out = partial_refit_weighted(&start, &s, &rows, &w, &opts).unwrap();
            assert!(objective(&out, &s, &w) >= objective(&start, &s, &w) - 1e-12);
            assert!(crate::pdcore::is_pd(&out));
            for i in 0..7 {
                for j in 0..7 {
                    if !rows.contains(&i) && !rows.contains(&j) {
                        assert_eq!(out.get(i, j), start.get(i, j));
                    }
                }
            }
        }
    }
}

#[test]
fn convergence_failure_carries_best_iterate() {
    let s = random_cov(10, 12, 1);
    let opts = SolverOptions {
        max_iter: 2,
        tol: 1e-14,
        ..SolverOptions::default()
    };
    match fit_l1(&s, &uniform(10, 0.05, 0.05), 1, &opts) {
        Err(Error::NotConverged { best, gap, .. }) => {
            assert!(gap > 0.0);
            assert!(crate::pdcore::is_pd(&best));
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
}
