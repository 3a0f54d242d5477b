//! Compare the five classifier families on a synthetic store whose
//! inventories mirror the reference corpus (82 homographs).
//!
//! cargo run --release --example model_comparison [-- --weighted]

use hgd::classifiers::{ModelConfig, ModelKind};
use hgd::dataset::SplitSpec;
use hgd::embeddings::{generate_synthetic_store, synthetic_dataset, SynthSpec};
use hgd::experiments::{run_model_comparison, RunOptions};
use hgd::fixtures::uniform_inventories;

fn main() -> hgd::Result<()> {
    let weighted = std::env::args().any(|a| a == "--weighted");
    let spec = SynthSpec::new(16, 0.5, 10.0, 0).with_inventories(uniform_inventories(40));
    let dataset = synthetic_dataset(&spec)?;
    let store = generate_synthetic_store(&spec)?;
    let models: Vec<ModelConfig> = ModelKind::ALL
        .iter()
        .map(|&k| ModelConfig::default_for(k, 0))
        .collect();
    let split = SplitSpec::new(SplitSpec::MODEL_COMPARISON_TEST_FRACTION, 0);
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_model_comparison(&dataset, &store, &models, &split, RunOptions { jobs, weighted })?;
    report.write_csv(std::io::stdout())?;
    for e in &report.excluded {
        eprintln!("excluded {}: {}", e.homograph, e.reason);
    }
    Ok(())
}
