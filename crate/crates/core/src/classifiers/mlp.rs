//! Feed-forward network with sigmoid hidden layers and a softmax output,
//! trained by full-batch gradient descent on mean cross-entropy.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_dim, softmax_in_place, Classifier, LabeledSet, TrainConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// `[d, hidden..., c]`.
    pub layer_sizes: Vec<usize>,
    /// Layer `l` maps `layer_sizes[l]` inputs to `layer_sizes[l + 1]`
    /// outputs; shape `fan_in × fan_out`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    labels: Vec<String>,
    pub config: TrainConfig,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Params {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl Params {
    /// Glorot-uniform weights, zero biases.
    fn init(layer_sizes: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(Array2::from_shape_simple_fn((fan_in, fan_out), || {
                rng.random_range(-a..a)
            }));
            biases.push(Array1::zeros(fan_out));
        }
        Params { weights, biases }
    }

    fn from_flat(layer_sizes: &[usize], theta: &[f64]) -> Self {
        let mut offset = 0;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let w = &theta[offset..offset + fan_in * fan_out];
            offset += fan_in * fan_out;
            weights.push(Array2::from_shape_vec((fan_in, fan_out), w.to_vec()).expect("shape"));
            biases.push(Array1::from_vec(theta[offset..offset + fan_out].to_vec()));
            offset += fan_out;
        }
        assert_eq!(offset, theta.len(), "parameter vector length");
        Params { weights, biases }
    }

    fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }

    /// Activations of every layer for a batch; the last entry holds the
    /// softmax probabilities.
    fn forward(&self, x: Array2<f64>) -> Vec<Array2<f64>> {
        let last = self.weights.len() - 1;
        let mut acts = vec![x];
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = acts[l].dot(w) + b;
            if l == last {
                for mut row in z.rows_mut() {
                    softmax_in_place(row.view_mut());
                }
            } else {
                z.mapv_inplace(sigmoid);
            }
            acts.push(z);
        }
        acts
    }

    fn loss_and_grad(&self, data: &LabeledSet, l2: f64) -> (f64, Params) {
        let n = data.len() as f64;
        let acts = self.forward(data.x().to_owned());
        let mut delta = acts.last().expect("output layer").clone();
        let mut loss = 0.0;
        for (i, &t) in data.targets().iter().enumerate() {
            loss -= delta[[i, t]].max(f64::MIN_POSITIVE).ln();
            delta[[i, t]] -= 1.0;
        }
        loss /= n;
        if l2 > 0.0 {
            loss += 0.5 * l2 * self.weights.iter().flatten().map(|w| w * w).sum::<f64>();
        }
        delta /= n;

        let layers = self.weights.len();
        let mut gw = Vec::with_capacity(layers);
        let mut gb = Vec::with_capacity(layers);
        for l in (0..layers).rev() {
            let mut w_grad = acts[l].t().dot(&delta);
            if l2 > 0.0 {
                w_grad.scaled_add(l2, &self.weights[l]);
            }
            gb.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut back = delta.dot(&self.weights[l].t());
                back.zip_mut_with(&acts[l], |g, &a| *g *= a * (1.0 - a));
                delta = back;
            }
            gw.push(w_grad);
        }
        gw.reverse();
        gb.reverse();
        (
            loss,
            Params {
                weights: gw,
                biases: gb,
            },
        )
    }

    fn step(&mut self, grad: &Params, lr: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grad.weights) {
            w.scaled_add(-lr, g);
        }
        for (b, g) in self.biases.iter_mut().zip(&grad.biases) {
            b.scaled_add(-lr, g);
        }
    }
}

fn layer_sizes(data: &LabeledSet, hidden: &[usize]) -> Result<Vec<usize>> {
    if hidden.contains(&0) {
        return Err(Error::Config("hidden layer width must be positive".into()));
    }
    let mut sizes = vec![data.dim()];
    sizes.extend_from_slice(hidden);
    sizes.push(data.num_labels());
    Ok(sizes)
}

pub fn mlp_fit(data: &LabeledSet, cfg: &TrainConfig, hidden: &[usize]) -> Result<MlpModel> {
    cfg.check()?;
    let sizes = layer_sizes(data, hidden)?;
    data.require_two_labels()?;
    data.check_finite()?;

    let mut params = Params::init(&sizes, cfg.seed);
    let mut prev_loss = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        let (loss, grad) = params.loss_and_grad(data, cfg.l2);
        if prev_loss - loss < cfg.tol {
            break;
        }
        prev_loss = loss;
        params.step(&grad, cfg.learning_rate);
        iterations += 1;
    }
    if params.flatten().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("MLP training diverged".into()));
    }
    Ok(MlpModel {
        layer_sizes: sizes,
        weights: params.weights,
        biases: params.biases,
        labels: data.labels().to_vec(),
        config: *cfg,
        iterations,
    })
}

impl MlpModel {
    pub fn num_params(data: &LabeledSet, hidden: &[usize]) -> Result<usize> {
        let sizes = layer_sizes(data, hidden)?;
        Ok(sizes.windows(2).map(|p| p[0] * p[1] + p[1]).sum())
    }

    /// Parameters the initializer produces for `seed`, flattened layer by
    /// layer (weights row-major, then biases).
    pub fn initial_params(data: &LabeledSet, hidden: &[usize], seed: u64) -> Result<Vec<f64>> {
        Ok(Params::init(&layer_sizes(data, hidden)?, seed).flatten())
    }

    /// Flattened parameters after `steps` plain gradient-descent steps.
    pub fn params_after(
        data: &LabeledSet,
        hidden: &[usize],
        cfg: &TrainConfig,
        steps: usize,
    ) -> Result<Vec<f64>> {
        let sizes = layer_sizes(data, hidden)?;
        let mut params = Params::init(&sizes, cfg.seed);
        for _ in 0..steps {
            let (_, grad) = params.loss_and_grad(data, cfg.l2);
            params.step(&grad, cfg.learning_rate);
        }
        Ok(params.flatten())
    }

    pub fn objective(data: &LabeledSet, hidden: &[usize], l2: f64, theta: &[f64]) -> Result<f64> {
        let sizes = layer_sizes(data, hidden)?;
        Ok(Params::from_flat(&sizes, theta).loss_and_grad(data, l2).0)
    }

    /// Backpropagated gradient of [`MlpModel::objective`].
    pub fn gradient(
        data: &LabeledSet,
        hidden: &[usize],
        l2: f64,
        theta: &[f64],
    ) -> Result<Vec<f64>> {
        let sizes = layer_sizes(data, hidden)?;
        Ok(Params::from_flat(&sizes, theta)
            .loss_and_grad(data, l2)
            .1
            .flatten())
    }

    pub fn proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.layer_sizes[0], x)?;
        let last = self.weights.len() - 1;
        let mut a = Array1::from_vec(x.to_vec());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = a.dot(w) + b;
            if l == last {
                softmax_in_place(z.view_mut());
            } else {
                z.mapv_inplace(sigmoid);
            }
            a = z;
        }
        Ok(a.to_vec())
    }
}

impl Classifier for MlpModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn dim(&self) -> usize {
        self.layer_sizes[0]
    }

    fn predict_index(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.proba(x)?))
    }
}
