//! Learns the block structure of synthetic data with three planted groups,
//! with both penalty families and both search strategies.
//!
//! ```text
//! cargo run --release --example structure_search -- [seed]
//! ```

use blockprec::harness::{standardize, synth_blocks, SynthSpec};
use blockprec::model::adjusted_rand_index;
use blockprec::structure::{search, SearchOptions, Strategy};
use blockprec::{Kind, PenaltyConfig};

fn main() -> blockprec::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let spec = SynthSpec {
        groups: vec![5, 5, 5],
        n: 200,
        within_strength: 0.2,
        noise: 0.02,
        seed,
    };
    let (data, planted, _) = synth_blocks(&spec)?;
    let (_, stats) = standardize(&data)?;
    let c = PenaltyConfig::new(1.0, 1.0, 50.0, 1.0)?;
    for kind in [Kind::Gl1, Kind::Gl12] {
        for strategy in [Strategy::Greedy, Strategy::Exhaustive] {
            let r = search(&stats, &c, kind, strategy, &SearchOptions::default())?;
            let bounds: Vec<String> = r.trajectory.iter().map(|t| format!("{:.2}", t.bound)).collect();
            println!(
                "{kind:>4} {:<10?} K={} ARI={:.3} refits={} {:.2}s  bounds [{}]  labels {:?}",
                strategy,
                r.final_partition.k(),
                adjusted_rand_index(&r.final_partition, &planted),
                r.full_refits,
                r.elapsed_seconds,
                bounds.join(", "),
                r.final_partition.labels_one_based()
            );
        }
    }
    Ok(())
}
