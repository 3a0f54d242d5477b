use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{check_dim, Classifier, LabeledSet};
use crate::{Error, Result};

/// K-nearest-neighbour classifier under Euclidean distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    x: Array2<f64>,
    y: Vec<usize>,
    labels: Vec<String>,
}

pub fn knn_fit(data: &LabeledSet, k: usize) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::Fit("empty training set".into()));
    }
    data.check_finite()?;
    Ok(KnnModel {
        k,
        x: data.x().to_owned(),
        y: data.targets().to_vec(),
        labels: data.labels().to_vec(),
    })
}

impl KnnModel {
    /// The `min(k, n)` nearest training rows as `(row, distance)`, ordered
    /// by distance then row index.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        check_dim(self.x.ncols(), x)?;
        let mut dists: Vec<(usize, f64)> = self
            .x
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                let sq: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (i, sq.sqrt())
            })
            .collect();
        dists.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        dists.truncate(self.k.min(dists.len()));
        Ok(dists)
    }
}

impl Classifier for KnnModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Majority label; ties go to the smaller mean neighbour distance, then
    /// the lexicographically smaller label.
    fn predict_index(&self, x: &[f64]) -> Result<usize> {
        let neighbors = self.neighbors(x)?;
        let mut votes = vec![0usize; self.labels.len()];
        let mut dist_sum = vec![0.0f64; self.labels.len()];
        for &(i, d) in &neighbors {
            votes[self.y[i]] += 1;
            dist_sum[self.y[i]] += d;
        }
        let top = *votes.iter().max().expect("at least one label");
        let mut best: Option<(usize, f64)> = None;
        for (label, &count) in votes.iter().enumerate() {
            if count != top {
                continue;
            }
            let mean = dist_sum[label] / count as f64;
            if best.is_none_or(|(_, m)| mean < m) {
                best = Some((label, mean));
            }
        }
        Ok(best.expect("top vote exists").0)
    }
}
