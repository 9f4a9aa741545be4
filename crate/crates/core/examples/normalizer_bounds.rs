//! Closed-form bounds on the log normalizer next to the exact value in two
//! dimensions.
//!
//! ```text
//! cargo run --example normalizer_bounds
//! ```

use blockprec::model::{exact_logz_2d, log_bound, log_bound_gl12};
use blockprec::{Kind, Partition, PenaltyConfig};

fn main() -> blockprec::Result<()> {
    println!("same group, lambda_d = lambda_1:");
    for l1 in [0.5, 1.0, 2.0] {
        let c = PenaltyConfig::new(l1, l1, l1, 1.0)?;
        let p = Partition::single_group(2);
        let bound = log_bound(Kind::Gl1, &p, &c);
        let exact = exact_logz_2d(&c, true)?;
        println!(
            "  lambda_1 = {l1:<4} bound {bound:>8.4}  exact {exact:>8.4}  gap {:.4}  ratio {:.4}",
            bound - exact,
            (bound - exact).exp()
        );
    }

    println!("different groups, lambda_1 = 1:");
    let p = Partition::singletons(2);
    for ratio in [1.1, 1.5, 2.5, 4.0, 8.0] {
        let c = PenaltyConfig::new(1.0, 1.0, ratio, 1.0)?;
        let bound = log_bound(Kind::Gl1, &p, &c);
        let exact = exact_logz_2d(&c, false)?;
        println!("  lambda_0 = {ratio:<4} bound {bound:>8.4}  exact {exact:>8.4}  gap {:.4}", bound - exact);
    }

    // the l1,2 bound replaces each between-group l1 term by one block normalizer
    let p = Partition::from_labels(&[1, 1, 2, 2, 2])?;
    let c = PenaltyConfig::new(1.0, 1.0, 2.0, 1.0)?;
    println!(
        "D = 5, groups [1,1,2,2,2]: gl1 {:.4}  gl12 {:.4}",
        log_bound(Kind::Gl1, &p, &c),
        log_bound_gl12(&p, &c)
    );
    Ok(())
}
