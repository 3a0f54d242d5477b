//! Evaluation metrics and the three analyses: classifier comparison,
//! pooling-strategy comparison and cosine-similarity distribution.
//!
//! Runners are pure functions of their inputs. Per-homograph jobs may run on
//! a dedicated thread pool, but results are always assembled in sorted
//! homograph order so the output never depends on scheduling.

use std::io::Write;

use rayon::prelude::*;

use crate::classifiers::LabeledSet;
use crate::dataset::Dataset;
use crate::embeddings::EmbeddingStore;
use crate::{Error, Result};

mod cosine_analysis;
mod embedding_comparison;
mod metrics;
mod model_comparison;

pub use cosine_analysis::{cosine_histogram, run_cosine_analysis, CosineReport, HistogramBin, HISTOGRAM_BINS};
pub use embedding_comparison::{
    run_embedding_comparison, EmbeddingCell, AVG_LAST_FOUR, LAST_LAYER, EmbeddingComparisonReport, EmbeddingHomographResult,
};
pub use metrics::{compute_metrics, Metrics};
pub use model_comparison::{
    run_model_comparison, HomographResult, ModelComparisonReport, ModelRow,
};

/// Execution knobs that do not change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for per-homograph jobs (and forest trees).
    pub jobs: usize,
    /// Weight the across-homograph mean by each homograph's record count
    /// instead of giving every homograph equal weight.
    pub weighted: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 1,
            weighted: false,
        }
    }
}

/// A homograph left out of an analysis, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub homograph: String,
    pub reason: String,
}

/// Maps `job` over `items` on a pool of `jobs` threads, preserving order.
fn run_jobs<T, R, F>(jobs: usize, items: &[T], job: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&job).collect()))
}

/// Checks that every store record agrees with the dataset record of the
/// same id.
fn check_alignment(dataset: &Dataset, store: &EmbeddingStore) -> Result<()> {
    for r in store.records() {
        match dataset.record(r.record_id) {
            Some(d) if d.homograph == r.homograph && d.phoneme == r.phoneme => {}
            Some(d) => {
                return Err(Error::Argument(format!(
                    "store record {} is ({}, {}) but dataset has ({}, {})",
                    r.record_id, r.homograph, r.phoneme, d.homograph, d.phoneme
                )))
            }
            None => {
                return Err(Error::Argument(format!(
                    "store record {} has no dataset record",
                    r.record_id
                )))
            }
        }
    }
    Ok(())
}

/// Builds a labelled set from store vectors and dataset phonemes.
fn labeled_set(dataset: &Dataset, store: &EmbeddingStore, ids: &[usize]) -> Result<LabeledSet> {
    let mut rows = Vec::with_capacity(ids.len());
    let mut labels = Vec::with_capacity(ids.len());
    for &id in ids {
        let v = store
            .vector(id)
            .ok_or_else(|| Error::Argument(format!("no vector for record {id}")))?;
        rows.push(v);
        labels.push(dataset.records()[id].phoneme.as_str());
    }
    LabeledSet::from_rows(&rows, &labels)
}

/// `Σ wᵢ xᵢ / Σ wᵢ`, summed in slice order.
fn weighted_mean(values: &[(f64, f64)]) -> f64 {
    let total: f64 = values.iter().map(|(_, w)| w).sum();
    values.iter().map(|(x, w)| x * w).sum::<f64>() / total
}

fn write_csv<W: Write>(sink: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
