//! Expected absolute entries of a 4x4 matrix under the group ℓ1 and group
//! ℓ1,2 densities for every distinct partition shape, by Gibbs sampling.
//!
//! ```text
//! cargo run --release --example gibbs_study
//! ```

use blockprec::sampler::{gibbs_chains, ChainConfig, ChainSummary};
use blockprec::{Kind, Partition, PenaltyConfig};

fn main() -> blockprec::Result<()> {
    let c = PenaltyConfig::new(0.1, 0.1, 1.0, 1.0)?;
    let cfg = ChainConfig {
        seed: 2024,
        ..ChainConfig::default()
    };
    let shapes: [&[usize]; 5] = [&[1, 2, 3, 4], &[1, 1, 2, 3], &[1, 1, 2, 2], &[1, 1, 1, 2], &[1, 1, 1, 1]];
    for kind in [Kind::Gl1, Kind::Gl12] {
        println!("{kind}");
        for labels in shapes {
            let p = Partition::from_labels(labels)?;
            let chains = gibbs_chains(kind, &p, &c, &cfg, 5)?;
            let s = ChainSummary::pool(&chains)?;
            let (within, between) = s.within_between();
            println!(
                "  {:?}  mean diag {:6.2}  E|X_ij| within {:6.3}  between {:6.3}",
                labels,
                s.overall_mean_diag(),
                within,
                between
            );
        }
    }
    Ok(())
}
