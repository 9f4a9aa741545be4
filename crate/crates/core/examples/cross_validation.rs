//! Five-fold cross-validation of the baseline and structured estimators on
//! synthetic data with three planted groups.
//!
//! ```text
//! cargo run --release --example cross_validation -- [seed] [n]
//! ```

use blockprec::harness::{cross_validate, synth_blocks, CvOptions, Method, SynthSpec};

fn main() -> blockprec::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let spec = SynthSpec {
        groups: vec![5, 5, 5],
        n,
        within_strength: 0.2,
        noise: 0.02,
        seed,
    };
    let (data, planted, _) = synth_blocks(&spec)?;
    let methods: Vec<Method> = ["GL1-ue", "GL12-ue", "GL1-ug", "GL12-ug", "GL12-k", "IL1", "T"]
        .iter()
        .map(|m| Method::parse(m, Some(&planted)))
        .collect::<blockprec::Result<_>>()?;
    let opts = CvOptions {
        seed,
        ..CvOptions::default()
    };
    let report = cross_validate(&data, &methods, &opts)?;
    println!("{} candidate triples", report.candidates);
    for m in &report.methods {
        let folds: Vec<String> = m.test_ll.iter().map(|t| t.map_or("fail".into(), |v| format!("{v:.3}"))).collect();
        println!(
            "{:<8} median {:>8.4}  folds [{}]  {:.1}s",
            m.method,
            m.median_test_ll.unwrap_or(f64::NAN),
            folds.join(", "),
            m.elapsed_seconds
        );
        if let Some(Some(sel)) = m.selected.first() {
            println!("         fold 1 penalties {sel:?}  partition {:?}", m.partitions[0]);
        }
    }
    Ok(())
}
