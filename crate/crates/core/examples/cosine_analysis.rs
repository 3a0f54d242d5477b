//! Mean pairwise cosine per homograph and its histogram, for all pairs and
//! for cross-phoneme pairs only.
//!
//! cargo run --example cosine_analysis

use hgd::embeddings::{generate_synthetic_store, PairFilter, SynthSpec};
use hgd::experiments::run_cosine_analysis;
use hgd::fixtures::uniform_inventories;

fn main() -> hgd::Result<()> {
    let spec = SynthSpec::new(32, 1.0, 4.0, 1).with_inventories(uniform_inventories(20));
    let store = generate_synthetic_store(&spec)?;
    for filter in [PairFilter::All, PairFilter::WithinPhoneme, PairFilter::CrossPhoneme] {
        let report = run_cosine_analysis(&store, filter)?;
        let mean = report.means.iter().map(|m| m.1).sum::<f64>() / report.means.len() as f64;
        println!("{filter:?}: mean over homographs {mean:.4}");
        for bin in report.histogram.iter().filter(|b| b.count > 0) {
            println!("  [{:>4}, {:>4}) {}", bin.left, bin.right, "#".repeat(bin.count));
        }
    }
    Ok(())
}
