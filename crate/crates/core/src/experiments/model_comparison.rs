use std::collections::BTreeSet;
use std::io::Write;

use super::{
    check_alignment, compute_metrics, labeled_set, run_jobs, weighted_mean, write_csv, Exclusion,
    Metrics, RunOptions,
};
use crate::classifiers::{Classifier, ModelConfig};
use crate::dataset::{split, Dataset, SplitSpec};
use crate::embeddings::EmbeddingStore;
use crate::{Error, Result};

/// Across-homograph mean metrics of one classifier family.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub model: String,
    pub metrics: Metrics,
    pub homographs: usize,
}

/// Test metrics of every model on one homograph.
#[derive(Debug, Clone, PartialEq)]
pub struct HomographResult {
    pub homograph: String,
    pub records: usize,
    /// `(model name, metrics)` in report row order.
    pub metrics: Vec<(String, Metrics)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparisonReport {
    /// One row per model, sorted by model name.
    pub rows: Vec<ModelRow>,
    pub per_homograph: Vec<HomographResult>,
    pub excluded: Vec<super::Exclusion>,
    pub split: SplitSpec,
    pub store_id: String,
    pub weighted: bool,
}

impl ModelComparisonReport {
    pub fn row(&self, model: &str) -> Option<&ModelRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// CSV with columns `model,accuracy,recall,f1,precision,homographs`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.model.clone(),
                    r.metrics.accuracy.to_string(),
                    r.metrics.recall_macro.to_string(),
                    r.metrics.f1_macro.to_string(),
                    r.metrics.precision_macro.to_string(),
                    r.homographs.to_string(),
                ]
            })
            .collect();
        write_csv(
            sink,
            &["model", "accuracy", "recall", "f1", "precision", "homographs"],
            &rows,
        )
    }
}

enum Outcome {
    Done(HomographResult),
    Excluded(Exclusion),
}

fn evaluate_homograph(
    dataset: &Dataset,
    store: &EmbeddingStore,
    homograph: &str,
    models: &[ModelConfig],
    spec: &SplitSpec,
) -> Result<Outcome> {
    let exclude = |reason: String| {
        Ok(Outcome::Excluded(Exclusion {
            homograph: homograph.to_string(),
            reason,
        }))
    };
    let ids = dataset.ids_for(homograph)?;
    let inventory = dataset.inventory(homograph)?;
    if inventory.num_phonemes() < 2 {
        return exclude("fewer than two phonemes".into());
    }
    if let Some(missing) = ids.iter().find(|&&id| !store.contains(id)) {
        return exclude(format!("record {missing} has no vector"));
    }
    let (train_ids, test_ids) = match split(dataset, homograph, spec) {
        Ok(s) => s,
        Err(e) => return exclude(e.to_string()),
    };
    if test_ids.is_empty() {
        return exclude("empty test split".into());
    }
    let train = labeled_set(dataset, store, &train_ids)?;
    let y_true: Vec<&str> = test_ids
        .iter()
        .map(|&id| dataset.records()[id].phoneme.as_str())
        .collect();

    let mut metrics = Vec::with_capacity(models.len());
    for config in models {
        let model = config.fit(&train)?;
        let y_pred = test_ids
            .iter()
            .map(|&id| model.predict(store.vector(id).expect("checked above")))
            .collect::<Result<Vec<_>>>()?;
        metrics.push((config.kind().name().to_string(), compute_metrics(&y_true, &y_pred)?));
    }
    Ok(Outcome::Done(HomographResult {
        homograph: homograph.to_string(),
        records: ids.len(),
        metrics,
    }))
}

/// Trains every model on each homograph's training split and averages the
/// test metrics across homographs.
///
/// Homographs with fewer than two phonemes, missing vectors or an unusable
/// split are skipped and listed in [`ModelComparisonReport::excluded`].
pub fn run_model_comparison(
    dataset: &Dataset,
    store: &EmbeddingStore,
    models: &[ModelConfig],
    spec: &SplitSpec,
    options: RunOptions,
) -> Result<ModelComparisonReport> {
    if models.is_empty() {
        return Err(Error::Argument("no models requested".into()));
    }
    let mut models = models.to_vec();
    models.sort_by_key(|m| m.kind().name());
    let kinds: BTreeSet<_> = models.iter().map(|m| m.kind()).collect();
    if kinds.len() != models.len() {
        return Err(Error::Argument("each model family may appear once".into()));
    }
    check_alignment(dataset, store)?;
    let homographs: Vec<&str> = dataset
        .homographs()
        .filter(|h| store.index().contains_key(*h))
        .collect();
    if homographs.is_empty() {
        return Err(Error::Argument("dataset and store share no homographs".into()));
    }

    let outcomes = run_jobs(options.jobs, &homographs, |h| {
        evaluate_homograph(dataset, store, h, &models, spec)
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
    for h in dataset.homographs().filter(|h| !store.index().contains_key(*h)) {
        excluded.push(Exclusion {
            homograph: h.to_string(),
            reason: "not in store".into(),
        });
    }
    excluded.sort_by(|a, b| a.homograph.cmp(&b.homograph));

    let rows = models
        .iter()
        .enumerate()
        .map(|(m, config)| {
            let mean = |field: fn(&Metrics) -> f64| {
                let values: Vec<(f64, f64)> = per_homograph
                    .iter()
                    .map(|r| {
                        let w = if options.weighted { r.records as f64 } else { 1.0 };
                        (field(&r.metrics[m].1), w)
                    })
                    .collect();
                weighted_mean(&values)
            };
            ModelRow {
                model: config.kind().name().to_string(),
                metrics: Metrics {
                    accuracy: mean(|x| x.accuracy),
                    precision_macro: mean(|x| x.precision_macro),
                    recall_macro: mean(|x| x.recall_macro),
                    f1_macro: mean(|x| x.f1_macro),
                    support: per_homograph.iter().map(|r| r.metrics[m].1.support).sum(),
                },
                homographs: per_homograph.len(),
            }
        })
        .collect();

    Ok(ModelComparisonReport {
        rows,
        per_homograph,
        excluded,
        split: *spec,
        store_id: format!("{}:{}", store.model_id(), store.pooling()),
        weighted: options.weighted,
    })
}
