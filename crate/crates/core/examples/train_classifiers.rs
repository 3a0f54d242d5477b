//! Fit each classifier family on one homograph, score it on a held-out
//! split and save it to the model format.
//!
//! cargo run --release --example train_classifiers

use hgd::classifiers::{read_model, write_model, Classifier, LabeledSet, ModelConfig, ModelKind};
use hgd::dataset::{split, SplitSpec};
use hgd::embeddings::{generate_synthetic_store, synthetic_dataset, SynthSpec};
use hgd::experiments::compute_metrics;
use hgd::fixtures::corpus_inventories;

fn main() -> hgd::Result<()> {
    let inventories: Vec<_> = corpus_inventories().into_iter().filter(|i| i.homograph == "سر").collect();
    let spec = SynthSpec::new(16, 1.5, 4.0, 0).with_inventories(inventories);
    let dataset = synthetic_dataset(&spec)?;
    let store = generate_synthetic_store(&spec)?;

    let (train_ids, test_ids) = split(&dataset, "سر", &SplitSpec::new(0.2, 0))?;
    let rows = |ids: &[usize]| ids.iter().map(|&i| store.vector(i).unwrap().to_vec()).collect::<Vec<_>>();
    let labels = |ids: &[usize]| ids.iter().map(|&i| dataset.records()[i].phoneme.clone()).collect::<Vec<_>>();
    let train = LabeledSet::from_rows(&rows(&train_ids), &labels(&train_ids))?;
    let (test_x, test_y) = (rows(&test_ids), labels(&test_ids));

    for kind in ModelKind::ALL {
        let model = ModelConfig::default_for(kind, 0).fit(&train)?;
        let mut bytes = Vec::new();
        write_model(&model, &mut bytes)?;
        let loaded = read_model(bytes.as_slice())?;
        let predicted = test_x.iter().map(|x| loaded.predict(x)).collect::<hgd::Result<Vec<_>>>()?;
        let test_y: Vec<&str> = test_y.iter().map(String::as_str).collect();
        let m = compute_metrics(&test_y, &predicted)?;
        println!(
            "{:<7} accuracy {:.3} f1 {:.3} ({} byte model)",
            kind.name(),
            m.accuracy, m.f1_macro, bytes.len()
        );
    }
    Ok(())
}
