//! Penalized precision estimates for a fixed structure: the Tikhonov closed
//! form, elementwise l1 and group l1,2, with their optimality certificates.
//!
//! ```text
//! cargo run --release --example fit_precision
//! ```

use blockprec::harness::{standardize, synth_blocks, SynthSpec};
use blockprec::solver::{fit_gl12, fit_l1, kkt_residual, tikhonov, weights_for, PenaltyScale, SolverOptions};
use blockprec::{Kind, PenaltyConfig, SymMatrix};

fn main() -> blockprec::Result<()> {
    let spec = SynthSpec {
        groups: vec![3, 3],
        n: 150,
        within_strength: 0.3,
        noise: 0.0,
        seed: 3,
    };
    let (data, planted, truth) = synth_blocks(&spec)?;
    let (_, stats) = standardize(&data)?;
    let s = &stats.scatter;

    let t = tikhonov(s, 0.1)?;
    println!("tikhonov(0.1) diagonal {:?}", round(&t.diagonal()));

    let opts = SolverOptions::default().with_scale(PenaltyScale::Prior);
    let c = PenaltyConfig::new(1.0, 2.0, 20.0, 1.0)?;
    let pen = SymMatrix::from_upper_fn(6, |i, j| if i == j { c.lambda_d } else { c.lambda_1 });
    let l1 = fit_l1(s, &pen, stats.n, &opts)?;
    println!("l1: {} iterations, gap {:.2e}", l1.iterations, l1.gap);

    let gl = fit_gl12(s, &planted, &c, stats.n, &opts)?;
    let w = weights_for(Kind::Gl12, &planted, &c, PenaltyScale::Prior, stats.n)?;
    println!(
        "gl12: {} iterations, gap {:.2e}, kkt {:.2e}",
        gl.iterations,
        gl.gap,
        kkt_residual(&gl.omega, s, &w)
    );
    println!("estimated vs planted precision (rows):");
    for (est, tru) in gl.omega.to_rows().iter().zip(truth.to_rows()) {
        println!("  {:?}  {:?}", round(est), round(&tru));
    }
    Ok(())
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 100.0).round() / 100.0).collect()
}
