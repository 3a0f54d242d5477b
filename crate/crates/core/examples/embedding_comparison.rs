//! Compare two pooling strategies by MLP accuracy per phoneme-count group.
//! The "last layer" store here is well separated and the "average of last
//! four" store is noise, so the first should win in every group.
//!
//! cargo run --release --example embedding_comparison

use hgd::dataset::SplitSpec;
use hgd::embeddings::{generate_synthetic_store, synthetic_dataset, PoolingStrategy, SynthSpec};
use hgd::experiments::{run_embedding_comparison, RunOptions};
use hgd::fixtures::uniform_inventories;

fn main() -> hgd::Result<()> {
    let separable = SynthSpec::new(16, 0.5, 10.0, 0).with_inventories(uniform_inventories(40));
    let noise = SynthSpec {
        class_separation: 0.0,
        pooling: PoolingStrategy::AvgLastFour,
        ..separable.clone()
    };
    let dataset = synthetic_dataset(&separable)?;
    let report = run_embedding_comparison(
        &dataset,
        &generate_synthetic_store(&separable)?,
        &generate_synthetic_store(&noise)?,
        &SplitSpec::new(SplitSpec::EMBEDDING_COMPARISON_TEST_FRACTION, 0),
        0,
        RunOptions {
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            weighted: false,
        },
    )?;
    report.write_csv(std::io::stdout())
}
