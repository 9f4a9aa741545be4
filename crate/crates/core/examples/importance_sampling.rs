//! Importance-sampling estimates of the log normalizer against the bound
//! and, in two dimensions, the exact value.
//!
//! ```text
//! cargo run --release --example importance_sampling
//! ```

use blockprec::model::{estimate_logz_is, exact_logz_2d, log_bound};
use blockprec::{Kind, Partition, PenaltyConfig};

fn main() -> blockprec::Result<()> {
    let p = Partition::singletons(2);
    for l0 in [1.2, 1.5, 1.8] {
        let c = PenaltyConfig::new(1.0, 1.0, l0, 1.0)?;
        let est = estimate_logz_is(&p, &c, Kind::Gl1, 100_000, 7)?;
        let exact = exact_logz_2d(&c, false)?;
        println!(
            "D=2 lambda_0={l0}: IS {:.4} ± {:.4} (ess {:.0})  exact {exact:.4}  bound {:.4}",
            est.logz_hat,
            est.std_err,
            est.ess,
            log_bound(Kind::Gl1, &p, &c)
        );
    }

    let p = Partition::from_labels(&[1, 1, 2, 2])?;
    let c = PenaltyConfig::new(1.0, 1.0, 3.0, 1.0)?;
    for kind in [Kind::Gl1, Kind::Gl12] {
        let est = estimate_logz_is(&p, &c, kind, 100_000, 11)?;
        println!(
            "D=4 {kind}: IS {:.4} ± {:.4}  bound {:.4}",
            est.logz_hat,
            est.std_err,
            log_bound(kind, &p, &c)
        );
    }
    Ok(())
}
