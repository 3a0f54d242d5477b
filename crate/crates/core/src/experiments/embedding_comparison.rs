use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use super::{
    check_alignment, labeled_set, run_jobs, weighted_mean, write_csv, Exclusion, RunOptions,
};
use crate::classifiers::{mlp_fit, Classifier, ModelConfig, TrainConfig};
use crate::dataset::{split, Dataset, SplitSpec};
use crate::embeddings::EmbeddingStore;
use crate::{Error, Result};

pub const LAST_LAYER: &str = "last_layer";
pub const AVG_LAST_FOUR: &str = "avg_last4";

/// Mean MLP test accuracy of one store over homographs with the same
/// number of distinct phonemes.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCell {
    pub phoneme_count: usize,
    /// `last_layer` or `avg_last4`.
    pub store: String,
    pub mean_accuracy: f64,
    pub homographs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingHomographResult {
    pub homograph: String,
    pub phoneme_count: usize,
    pub records: usize,
    pub accuracy_last: f64,
    pub accuracy_avg4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingComparisonReport {
    /// Sorted by phoneme count, then store.
    pub cells: Vec<EmbeddingCell>,
    pub per_homograph: Vec<EmbeddingHomographResult>,
    pub excluded: Vec<Exclusion>,
    pub split: SplitSpec,
    pub seed: u64,
}

impl EmbeddingComparisonReport {
    pub fn cell(&self, phoneme_count: usize, store: &str) -> Option<&EmbeddingCell> {
        self.cells
            .iter()
            .find(|c| c.phoneme_count == phoneme_count && c.store == store)
    }

    /// CSV with columns `phoneme_count,store,mean_accuracy,homographs`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|c| {
                vec![
                    c.phoneme_count.to_string(),
                    c.store.clone(),
                    c.mean_accuracy.to_string(),
                    c.homographs.to_string(),
                ]
            })
            .collect();
        write_csv(
            sink,
            &["phoneme_count", "store", "mean_accuracy", "homographs"],
            &rows,
        )
    }
}

fn coverage_mismatch(a: &EmbeddingStore, b: &EmbeddingStore) -> Vec<usize> {
    let ids_a: BTreeSet<usize> = a.records().iter().map(|r| r.record_id).collect();
    let ids_b: BTreeSet<usize> = b.records().iter().map(|r| r.record_id).collect();
    ids_a.symmetric_difference(&ids_b).copied().collect()
}

fn accuracy(
    dataset: &Dataset,
    store: &EmbeddingStore,
    train_ids: &[usize],
    test_ids: &[usize],
    config: &TrainConfig,
) -> Result<f64> {
    let train = labeled_set(dataset, store, train_ids)?;
    let model = mlp_fit(&train, config, &ModelConfig::MLP_HIDDEN)?;
    let mut correct = 0usize;
    for &id in test_ids {
        let v = store.vector(id).expect("coverage checked");
        if model.predict(v)? == dataset.records()[id].phoneme {
            correct += 1;
        }
    }
    Ok(correct as f64 / test_ids.len() as f64)
}

enum Outcome {
    Done(EmbeddingHomographResult),
    Excluded(Exclusion),
}

/// Compares two pooling strategies by per-homograph MLP accuracy, grouped
/// by the number of distinct phonemes.
///
/// Both stores are evaluated on the same split of each homograph. The MLP
/// uses the default configuration seeded with `seed`.
pub fn run_embedding_comparison(
    dataset: &Dataset,
    store_last: &EmbeddingStore,
    store_avg4: &EmbeddingStore,
    spec: &SplitSpec,
    seed: u64,
    options: RunOptions,
) -> Result<EmbeddingComparisonReport> {
    let mismatch = coverage_mismatch(store_last, store_avg4);
    if !mismatch.is_empty() {
        let shown: Vec<String> = mismatch.iter().take(10).map(ToString::to_string).collect();
        return Err(Error::Argument(format!(
            "stores cover different records ({} differ, e.g. {})",
            mismatch.len(),
            shown.join(", ")
        )));
    }
    check_alignment(dataset, store_last)?;
    check_alignment(dataset, store_avg4)?;

    let homographs: Vec<&str> = dataset
        .homographs()
        .filter(|h| store_last.index().contains_key(*h))
        .collect();
    if homographs.is_empty() {
        return Err(Error::Argument("dataset and stores share no homographs".into()));
    }
    let config = TrainConfig::mlp_default(seed);

    let outcomes = run_jobs(options.jobs, &homographs, |&h| -> Result<Outcome> {
        let exclude = |reason: String| {
            Ok(Outcome::Excluded(Exclusion {
                homograph: h.to_string(),
                reason,
            }))
        };
        let ids = dataset.ids_for(h)?;
        let phoneme_count = dataset.inventory(h)?.num_phonemes();
        if phoneme_count < 2 {
            return exclude("fewer than two phonemes".into());
        }
        if let Some(missing) = ids.iter().find(|&&id| !store_last.contains(id)) {
            return exclude(format!("record {missing} has no vector"));
        }
        let (train_ids, test_ids) = match split(dataset, h, spec) {
            Ok(s) => s,
            Err(e) => return exclude(e.to_string()),
        };
        if test_ids.is_empty() {
            return exclude("empty test split".into());
        }
        Ok(Outcome::Done(EmbeddingHomographResult {
            homograph: h.to_string(),
            phoneme_count,
            records: ids.len(),
            accuracy_last: accuracy(dataset, store_last, &train_ids, &test_ids, &config)?,
            accuracy_avg4: accuracy(dataset, store_avg4, &train_ids, &test_ids, &config)?,
        }))
    })?;

    let mut per_homograph = Vec::new();
    let mut excluded = Vec::new();
    for outcome in outcomes {
        match outcome? {
            Outcome::Done(r) => per_homograph.push(r),
            Outcome::Excluded(e) => excluded.push(e),
        }
    }
    if per_homograph.is_empty() {
        return Err(Error::Argument("no homograph could be evaluated".into()));
    }

    let mut groups: BTreeMap<usize, Vec<&EmbeddingHomographResult>> = BTreeMap::new();
    for r in &per_homograph {
        groups.entry(r.phoneme_count).or_default().push(r);
    }
    let mut cells = Vec::new();
    for (&phoneme_count, members) in &groups {
        let weight = |r: &EmbeddingHomographResult| {
            if options.weighted {
                r.records as f64
            } else {
                1.0
            }
        };
        let last: Vec<(f64, f64)> = members.iter().map(|r| (r.accuracy_last, weight(r))).collect();
        let avg4: Vec<(f64, f64)> = members.iter().map(|r| (r.accuracy_avg4, weight(r))).collect();
        // "avg_last4" sorts before "last_layer".
        cells.push(EmbeddingCell {
            phoneme_count,
            store: AVG_LAST_FOUR.into(),
            mean_accuracy: weighted_mean(&avg4),
            homographs: members.len(),
        });
        cells.push(EmbeddingCell {
            phoneme_count,
            store: LAST_LAYER.into(),
            mean_accuracy: weighted_mean(&last),
            homographs: members.len(),
        });
    }

    Ok(EmbeddingComparisonReport {
        cells,
        per_homograph,
        excluded,
        split: *spec,
        seed,
    })
}
