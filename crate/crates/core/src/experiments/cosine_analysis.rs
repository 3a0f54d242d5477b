use std::io::Write;

use super::{write_csv, Exclusion};
use crate::embeddings::{mean_pairwise_cosine_filtered, EmbeddingStore, PairFilter, PoolingStrategy};
use crate::{Error, Result};

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosineReport {
    pub pooling: PoolingStrategy,
    pub filter: PairFilter,
    /// `(homograph, mean pairwise cosine)` sorted by homograph.
    pub means: Vec<(String, f64)>,
    /// 20 equal-width bins over `[-1, 1]`; left-closed, right-open, except
    /// the last bin which also includes 1.
    pub histogram: Vec<HistogramBin>,
    pub excluded: Vec<Exclusion>,
}

fn edge(i: usize) -> f64 {
    (i as f64 - 10.0) / 10.0
}

fn bin_index(value: f64) -> usize {
    let mut i = (((value + 1.0) * 10.0).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1);
    while i + 1 < HISTOGRAM_BINS && value >= edge(i + 1) {
        i += 1;
    }
    while i > 0 && value < edge(i) {
        i -= 1;
    }
    i
}

/// Histogram of `values` over the fixed cosine bins.
pub fn cosine_histogram(values: impl IntoIterator<Item = f64>) -> Vec<HistogramBin> {
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            left: edge(i),
            right: edge(i + 1),
            count: 0,
        })
        .collect();
    for v in values {
        bins[bin_index(v)].count += 1;
    }
    bins
}

impl CosineReport {
    pub fn mean_for(&self, homograph: &str) -> Option<f64> {
        self.means
            .iter()
            .find(|(h, _)| h == homograph)
            .map(|(_, m)| *m)
    }

    /// CSV with columns `homograph,mean_cosine`.
    pub fn write_means_csv<W: Write>(&self, sink: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .means
            .iter()
            .map(|(h, m)| vec![h.clone(), m.to_string()])
            .collect();
        write_csv(sink, &["homograph", "mean_cosine"], &rows)
    }

    /// CSV with columns `bin_left,bin_right,count`.
    pub fn write_histogram_csv<W: Write>(&self, sink: W) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .histogram
            .iter()
            .map(|b| vec![b.left.to_string(), b.right.to_string(), b.count.to_string()])
            .collect();
        write_csv(sink, &["bin_left", "bin_right", "count"], &rows)
    }
}

/// Mean pairwise cosine of each homograph's vectors and their histogram.
///
/// Homographs with fewer than two vectors, or no pair passing `filter`, are
/// excluded and listed. A zero-norm vector is an error naming its record.
pub fn run_cosine_analysis(store: &EmbeddingStore, filter: PairFilter) -> Result<CosineReport> {
    let mut means = Vec::new();
    let mut excluded = Vec::new();
    for (homograph, ids) in store.index() {
        let records: Vec<_> = ids.iter().map(|&id| store.get(id).expect("indexed")).collect();
        if records.len() < 2 {
            excluded.push(Exclusion {
                homograph: homograph.clone(),
                reason: format!("{} vector(s)", records.len()),
            });
            continue;
        }
        let vectors: Vec<&[f64]> = records.iter().map(|r| r.vector.as_slice()).collect();
        let labels: Vec<&str> = records.iter().map(|r| r.phoneme.as_str()).collect();
        match mean_pairwise_cosine_filtered(&vectors, Some(&labels[..]), filter) {
            Ok(m) => means.push((homograph.clone(), m)),
            Err(Error::InsufficientData(reason)) => excluded.push(Exclusion {
                homograph: homograph.clone(),
                reason,
            }),
            Err(Error::DegenerateVector(_)) => {
                let bad = records
                    .iter()
                    .find(|r| r.vector.iter().all(|v| *v == 0.0))
                    .map_or(ids[0], |r| r.record_id);
                return Err(Error::DegenerateVector(format!("record {bad}")));
            }
            Err(e) => return Err(e),
        }
    }
    let histogram = cosine_histogram(means.iter().map(|(_, m)| *m));
    Ok(CosineReport {
        pooling: store.pooling(),
        filter,
        means,
        histogram,
        excluded,
    })
}
