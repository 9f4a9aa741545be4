//! Synthetic data with planted groups: generation, CSV round trip and
//! standardization.
//!
//! ```text
//! cargo run --example synthetic_data -- [out.csv]
//! ```

use blockprec::harness::{ingest_csv, standardize, synth_blocks, SynthSpec};

fn main() -> blockprec::Result<()> {
    let spec = SynthSpec {
        groups: vec![4, 3, 3],
        n: 500,
        within_strength: 0.25,
        noise: 0.02,
        seed: 42,
    };
    let (data, planted, omega) = synth_blocks(&spec)?;
    println!("{} rows x {} columns, planted labels {:?}", data.n(), data.dim(), planted.labels_one_based());
    println!("precision row 1: {:?}", omega.to_rows()[0].iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());

    let path = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("blockprec_synthetic.csv"));
    data.write_csv(&path)?;
    let back = ingest_csv(&path, true)?;
    assert_eq!(back.dim(), data.dim());
    let (_, stats) = standardize(&back)?;
    println!(
        "wrote {}; standardized scatter diagonal {:?}",
        path.display(),
        stats.scatter.diagonal().iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()
    );
    Ok(())
}
