//! Random forest of Gini-split decision trees.
//!
//! Each tree is grown on a bootstrap sample drawn from its own random
//! stream `(seed, tree index)`, so trees can be built in parallel without
//! affecting the result. At every node `⌈√d⌉` candidate features are drawn
//! without replacement; thresholds are midpoints between consecutive
//! distinct values. Ties prefer the lowest feature index, then the lowest
//! threshold.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_dim, Classifier, LabeledSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Per-label sample counts reaching this leaf.
    Leaf { counts: Vec<usize> },
}

/// Arena-allocated binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_trees: usize,
    pub seed: u64,
    dim: usize,
    labels: Vec<String>,
    pub trees: Vec<Tree>,
}

/// `1 − Σ p²` over the label proportions of `counts`.
pub fn gini(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

/// Index of the largest count; the first one wins ties.
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

pub fn forest_fit(data: &LabeledSet, n_trees: usize, seed: u64) -> Result<ForestModel> {
    if n_trees == 0 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::Fit("empty training set".into()));
    }
    data.check_finite()?;
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            grow_tree(data, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        n_trees,
        seed,
        dim: data.dim(),
        labels: data.labels().to_vec(),
        trees,
    })
}

fn label_counts(data: &LabeledSet, samples: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; data.num_labels()];
    for &i in samples {
        counts[data.targets()[i]] += 1;
    }
    counts
}

struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

/// Best midpoint split on `feature`, or `None` if the feature is constant
/// over `samples`.
fn best_split_on(data: &LabeledSet, samples: &[usize], feature: usize) -> Option<Candidate> {
    let c = data.num_labels();
    let mut sorted: Vec<(f64, usize)> = samples
        .iter()
        .map(|&i| (data.x()[[i, feature]], data.targets()[i]))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n = sorted.len();
    let mut right = vec![0usize; c];
    for &(_, y) in &sorted {
        right[y] += 1;
    }
    let mut left = vec![0usize; c];
    let mut best: Option<Candidate> = None;
    for i in 0..n - 1 {
        let (value, y) = sorted[i];
        left[y] += 1;
        right[y] -= 1;
        let next = sorted[i + 1].0;
        if value == next {
            continue;
        }
        let n_left = (i + 1) as f64;
        let n_right = (n - i - 1) as f64;
        let impurity = (n_left * gini(&left) + n_right * gini(&right)) / n as f64;
        if best.as_ref().is_none_or(|b| impurity < b.impurity) {
            let mut threshold = value + (next - value) / 2.0;
            if threshold >= next {
                threshold = value;
            }
            best = Some(Candidate {
                impurity,
                feature,
                threshold,
            });
        }
    }
    best
}

fn grow_tree(data: &LabeledSet, rng: &mut ChaCha8Rng) -> Tree {
    let n = data.len();
    let d = data.dim();
    let n_features = (d as f64).sqrt().ceil() as usize;
    let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();

    let mut nodes = vec![Node::Leaf { counts: Vec::new() }];
    let mut work = vec![(0usize, bootstrap)];
    while let Some((slot, samples)) = work.pop() {
        let counts = label_counts(data, &samples);
        let parent = gini(&counts);
        if samples.len() < 2 || parent == 0.0 {
            nodes[slot] = Node::Leaf { counts };
            continue;
        }
        let mut features: Vec<usize> = sample(rng, d, n_features.min(d)).into_vec();
        features.sort_unstable();
        let mut best: Option<Candidate> = None;
        for f in features {
            if let Some(cand) = best_split_on(data, &samples, f) {
                if best.as_ref().is_none_or(|b| cand.impurity < b.impurity) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some(split) if split.impurity < parent => {
                let (l, r): (Vec<usize>, Vec<usize>) = samples
                    .iter()
                    .partition(|&&i| data.x()[[i, split.feature]] <= split.threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { counts: Vec::new() });
                let right = nodes.len();
                nodes.push(Node::Leaf { counts: Vec::new() });
                nodes[slot] = Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                };
                // Right first so the left subtree is expanded first.
                work.push((right, r));
                work.push((left, l));
            }
            _ => nodes[slot] = Node::Leaf { counts },
        }
    }
    Tree { nodes }
}

impl Tree {
    pub fn leaf_counts(&self, x: &[f64]) -> &[usize] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_index(&self, x: &[f64]) -> usize {
        majority(self.leaf_counts(x))
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

impl Classifier for ForestModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn predict_index(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.dim, x)?;
        let mut votes = vec![0usize; self.labels.len()];
        for tree in &self.trees {
            votes[tree.predict_index(x)] += 1;
        }
        Ok(majority(&votes))
    }
}
