//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Objective: mean softmax cross-entropy plus `(l2 / 2) * ‖W‖²` (the bias
//! is not penalised). Parameters start at zero.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{argmax, check_dim, softmax_in_place, Classifier, LabeledSet, TrainConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    /// `c × d`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    labels: Vec<String>,
    pub config: TrainConfig,
    /// Gradient steps actually taken.
    pub iterations: usize,
}

pub fn logreg_fit(data: &LabeledSet, cfg: &TrainConfig) -> Result<LogRegModel> {
    cfg.check()?;
    data.require_two_labels()?;
    data.check_finite()?;
    let (c, d) = (data.num_labels(), data.dim());
    let mut weights = Array2::<f64>::zeros((c, d));
    let mut bias = Array1::<f64>::zeros(c);

    let mut prev_loss = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        let (loss, gw, gb) = loss_and_grad(data, &weights, &bias, cfg.l2);
        if prev_loss - loss < cfg.tol {
            break;
        }
        prev_loss = loss;
        weights.scaled_add(-cfg.learning_rate, &gw);
        bias.scaled_add(-cfg.learning_rate, &gb);
        iterations += 1;
    }
    if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("logistic regression diverged".into()));
    }
    Ok(LogRegModel {
        weights,
        bias,
        labels: data.labels().to_vec(),
        config: *cfg,
        iterations,
    })
}

fn probabilities(data: &LabeledSet, weights: &Array2<f64>, bias: &Array1<f64>) -> Array2<f64> {
    let mut p = data.x().dot(&weights.t()) + bias;
    for mut row in p.rows_mut() {
        softmax_in_place(row.view_mut());
    }
    p
}

fn loss_and_grad(
    data: &LabeledSet,
    weights: &Array2<f64>,
    bias: &Array1<f64>,
    l2: f64,
) -> (f64, Array2<f64>, Array1<f64>) {
    let n = data.len() as f64;
    let mut p = probabilities(data, weights, bias);
    let mut loss = 0.0;
    for (i, &t) in data.targets().iter().enumerate() {
        loss -= p[[i, t]].max(f64::MIN_POSITIVE).ln();
        p[[i, t]] -= 1.0;
    }
    loss = loss / n + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    // p now holds P - Y
    let gw = p.t().dot(&data.x()) / n + weights * l2;
    let gb = p.sum_axis(Axis(0)) / n;
    (loss, gw, gb)
}

fn unflatten(data: &LabeledSet, theta: &[f64]) -> (Array2<f64>, Array1<f64>) {
    let (c, d) = (data.num_labels(), data.dim());
    assert_eq!(theta.len(), c * d + c, "parameter vector length");
    let w = Array2::from_shape_vec((c, d), theta[..c * d].to_vec()).expect("shape");
    let b = Array1::from_vec(theta[c * d..].to_vec());
    (w, b)
}

impl LogRegModel {
    /// Number of scalar parameters for `data`: `c·d + c`.
    pub fn num_params(data: &LabeledSet) -> usize {
        data.num_labels() * (data.dim() + 1)
    }

    /// Training objective at a flattened parameter vector (`W` row-major,
    /// then `b`).
    pub fn objective(data: &LabeledSet, l2: f64, theta: &[f64]) -> f64 {
        let (w, b) = unflatten(data, theta);
        loss_and_grad(data, &w, &b, l2).0
    }

    /// Analytic gradient of [`LogRegModel::objective`].
    pub fn gradient(data: &LabeledSet, l2: f64, theta: &[f64]) -> Vec<f64> {
        let (w, b) = unflatten(data, theta);
        let (_, gw, gb) = loss_and_grad(data, &w, &b, l2);
        gw.iter().chain(gb.iter()).copied().collect()
    }

    pub fn proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.weights.ncols(), x)?;
        let mut z: Vec<f64> = self
            .weights
            .rows()
            .into_iter()
            .zip(&self.bias)
            .map(|(w, b)| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b)
            .collect();
        softmax_in_place((&mut z[..]).into());
        Ok(z)
    }
}

impl Classifier for LogRegModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn dim(&self) -> usize {
        self.weights.ncols()
    }

    fn predict_index(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.proba(x)?))
    }
}
