//! Per-homograph classifiers, implemented from scratch on `ndarray`.
//!
//! Every model orders its labels lexicographically and resolves argmax and
//! vote ties in favour of the lexicographically smallest label, so results
//! are reproducible across runs and platforms.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

mod forest;
mod gradcheck;
mod knn;
mod logreg;
mod mlp;
mod model_io;
mod ridge;

pub use forest::{forest_fit, gini, ForestModel, Node, Tree};
pub use gradcheck::{finite_difference_grad, max_relative_error};
pub use knn::{knn_fit, KnnModel};
pub use logreg::{logreg_fit, LogRegModel};
pub use mlp::{mlp_fit, MlpModel};
pub use model_io::{read_model, write_model, MODEL_FORMAT};
pub use ridge::{normal_equations, ridge_fit, solve_normal_equations, RidgeModel};

/// Feature matrix with string labels, stored as indices into a sorted
/// label list.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    x: Array2<f64>,
    y: Vec<usize>,
    labels: Vec<String>,
}

impl LabeledSet {
    pub fn new<S: AsRef<str>>(x: Array2<f64>, y: &[S]) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Fit("empty training set".into()));
        }
        if x.nrows() != y.len() {
            return Err(Error::Argument(format!(
                "{} rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        let labels: Vec<String> = y
            .iter()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let y = y
            .iter()
            .map(|s| labels.binary_search_by(|l| l.as_str().cmp(s.as_ref())).unwrap())
            .collect();
        Ok(LabeledSet { x, y, labels })
    }

    pub fn from_rows<R: AsRef<[f64]>, S: AsRef<str>>(rows: &[R], y: &[S]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut flat = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    actual: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        let x = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::Argument(e.to_string()))?;
        Self::new(x, y)
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.x.row(i)
    }

    /// Label index of each row.
    pub fn targets(&self) -> &[usize] {
        &self.y
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[self.y[i]]
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    fn check_finite(&self) -> Result<()> {
        if let Some((idx, _)) = self.x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Fit(format!(
                "non-finite feature at row {}, column {}",
                idx.0, idx.1
            )));
        }
        Ok(())
    }

    fn require_two_labels(&self) -> Result<()> {
        if self.num_labels() < 2 {
            return Err(Error::Fit("at least two labels required".into()));
        }
        Ok(())
    }
}

/// Gradient-descent settings shared by logistic regression and the MLP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Training stops once one step lowers the loss by less than this.
    pub tol: f64,
    pub l2: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn logreg_default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            max_iters: 500,
            tol: 1e-6,
            l2: 1e-4,
            seed: 0,
        }
    }

    pub fn mlp_default(seed: u64) -> Self {
        TrainConfig {
            learning_rate: 0.05,
            max_iters: 300,
            tol: 1e-7,
            l2: 0.0,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Config("tol must be finite and >= 0".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::Config("l2 must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Common prediction interface.
pub trait Classifier {
    fn labels(&self) -> &[String];

    fn dim(&self) -> usize;

    /// Index into [`Classifier::labels`] of the predicted label.
    fn predict_index(&self, x: &[f64]) -> Result<usize>;

    fn predict(&self, x: &[f64]) -> Result<&str> {
        let i = self.predict_index(x)?;
        Ok(&self.labels()[i])
    }
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Dimension {
            expected,
            actual: x.len(),
        });
    }
    Ok(())
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// In-place, numerically stable softmax of one row.
pub(crate) fn softmax_in_place(mut row: ndarray::ArrayViewMut1<'_, f64>) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Knn,
    #[value(name = "logreg")]
    LogReg,
    Ridge,
    Mlp,
    Forest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Knn,
        ModelKind::LogReg,
        ModelKind::Ridge,
        ModelKind::Mlp,
        ModelKind::Forest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Knn => "knn",
            ModelKind::LogReg => "logreg",
            ModelKind::Ridge => "ridge",
            ModelKind::Mlp => "mlp",
            ModelKind::Forest => "forest",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown model {s:?}")))
    }
}

/// Hyperparameters for one classifier family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelConfig {
    Knn { k: usize },
    LogReg(TrainConfig),
    Ridge { alpha: f64 },
    Mlp { config: TrainConfig, hidden: Vec<usize> },
    Forest { n_trees: usize, seed: u64 },
}

impl ModelConfig {
    pub const KNN_K: usize = 7;
    pub const RIDGE_ALPHA: f64 = 1.0;
    pub const MLP_HIDDEN: [usize; 2] = [100, 100];
    pub const FOREST_TREES: usize = 100;

    /// Default configuration of a family; `seed` feeds the MLP initializer
    /// and the forest.
    pub fn default_for(kind: ModelKind, seed: u64) -> Self {
        match kind {
            ModelKind::Knn => ModelConfig::Knn { k: Self::KNN_K },
            ModelKind::LogReg => ModelConfig::LogReg(TrainConfig {
                seed,
                ..TrainConfig::logreg_default()
            }),
            ModelKind::Ridge => ModelConfig::Ridge {
                alpha: Self::RIDGE_ALPHA,
            },
            ModelKind::Mlp => ModelConfig::Mlp {
                config: TrainConfig::mlp_default(seed),
                hidden: Self::MLP_HIDDEN.to_vec(),
            },
            ModelKind::Forest => ModelConfig::Forest {
                n_trees: Self::FOREST_TREES,
                seed,
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Knn { .. } => ModelKind::Knn,
            ModelConfig::LogReg(_) => ModelKind::LogReg,
            ModelConfig::Ridge { .. } => ModelKind::Ridge,
            ModelConfig::Mlp { .. } => ModelKind::Mlp,
            ModelConfig::Forest { .. } => ModelKind::Forest,
        }
    }

    pub fn fit(&self, data: &LabeledSet) -> Result<ClassifierModel> {
        Ok(match self {
            ModelConfig::Knn { k } => ClassifierModel::Knn(knn_fit(data, *k)?),
            ModelConfig::LogReg(cfg) => ClassifierModel::LogReg(logreg_fit(data, cfg)?),
            ModelConfig::Ridge { alpha } => ClassifierModel::Ridge(ridge_fit(data, *alpha)?),
            ModelConfig::Mlp { config, hidden } => {
                ClassifierModel::Mlp(mlp_fit(data, config, hidden)?)
            }
            ModelConfig::Forest { n_trees, seed } => {
                ClassifierModel::Forest(forest_fit(data, *n_trees, *seed)?)
            }
        })
    }
}

/// A trained model of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Knn(KnnModel),
    LogReg(LogRegModel),
    Ridge(RidgeModel),
    Mlp(MlpModel),
    Forest(ForestModel),
}

impl ClassifierModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            ClassifierModel::Knn(_) => ModelKind::Knn,
            ClassifierModel::LogReg(_) => ModelKind::LogReg,
            ClassifierModel::Ridge(_) => ModelKind::Ridge,
            ClassifierModel::Mlp(_) => ModelKind::Mlp,
            ClassifierModel::Forest(_) => ModelKind::Forest,
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            ClassifierModel::Knn(m) => m,
            ClassifierModel::LogReg(m) => m,
            ClassifierModel::Ridge(m) => m,
            ClassifierModel::Mlp(m) => m,
            ClassifierModel::Forest(m) => m,
        }
    }
}

impl Classifier for ClassifierModel {
    fn labels(&self) -> &[String] {
        self.inner().labels()
    }

    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn predict_index(&self, x: &[f64]) -> Result<usize> {
        self.inner().predict_index(x)
    }
}
