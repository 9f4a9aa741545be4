//! Draws from the truncated exponential, Laplace and hyperbolic
//! conditionals used by the Gibbs sampler, with a feasible interval taken
//! from a PD matrix.
//!
//! ```text
//! cargo run --release --example truncated_sampling
//! ```

use blockprec::pdcore::pd_interval;
use blockprec::sampler::{sample_trunc_exponential, sample_trunc_hyperbolic, sample_trunc_laplace};
use blockprec::SymMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> blockprec::Result<()> {
    let x = SymMatrix::from_rows(&[vec![2.0, 0.5, 0.1], vec![0.5, 1.0, -0.2], vec![0.1, -0.2, 1.5]])?;
    let iv = pd_interval(&x, 0, 1)?;
    println!("entry (0,1) keeps X PD on ({:.4}, {:.4})", iv.lo, iv.hi);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 20_000;
    let mean = |f: &mut dyn FnMut() -> blockprec::Result<f64>| -> blockprec::Result<f64> {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += f()?;
        }
        Ok(acc / n as f64)
    };
    let e = mean(&mut || sample_trunc_exponential(1.0, 0.0, 2.0, &mut rng))?;
    println!("Exp(1) on (0, 2): mean {e:.4} (exact {:.4})", 1.0 - 2.0 / (2f64.exp() - 1.0));
    let l = mean(&mut || sample_trunc_laplace(3.0, iv.lo, iv.hi, &mut rng))?;
    println!("Laplace(3) on the PD interval: mean {l:.4}");
    for gamma in [0.0, 0.5, 2.0] {
        let h = mean(&mut || sample_trunc_hyperbolic(2.0, gamma, -1.0, 3.0, &mut rng).map(f64::abs))?;
        println!("hyperbolic rate 2, gamma {gamma}: E|x| on (-1, 3) {h:.4}");
    }
    Ok(())
}
