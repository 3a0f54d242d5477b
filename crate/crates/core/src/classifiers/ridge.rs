//! One-vs-rest ridge classifier solved exactly through the normal equations.
//!
//! For every label `c` the targets are `+1` for rows labelled `c` and `-1`
//! otherwise. Features and targets are centred, then
//! `(XcᵀXc + αI) w_c = Xcᵀ t_c` is solved by Cholesky factorisation and the
//! intercept is recovered from the means.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{argmax, check_dim, Classifier, LabeledSet};
use crate::linalg::cholesky_solve;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub alpha: f64,
    /// `c × d`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    labels: Vec<String>,
    pub feature_means: Array1<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Solves `(XᵀX + αI) W = Xᵀ T` without any centring. `targets` is
/// `n × c`; the result is `d × c`.
pub fn solve_normal_equations(
    x: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    alpha: f64,
) -> Result<Array2<f64>> {
    check_alpha(alpha)?;
    if x.nrows() != targets.nrows() {
        return Err(Error::Dimension {
            expected: x.nrows(),
            actual: targets.nrows(),
        });
    }
    let mut gram = x.t().dot(&x);
    gram.diag_mut().mapv_inplace(|v| v + alpha);
    let rhs = x.t().dot(&targets);
    cholesky_solve(gram.view(), rhs.view())
}

/// ±1 one-vs-rest target matrix, `n × c`.
fn signed_targets(data: &LabeledSet) -> Array2<f64> {
    let mut t = Array2::from_elem((data.len(), data.num_labels()), -1.0);
    for (i, &label) in data.targets().iter().enumerate() {
        t[[i, label]] = 1.0;
    }
    t
}

/// The centred system `(A, B)` with `A = XcᵀXc + αI` and `B = Xcᵀ Tc`
/// (one column per label) that [`ridge_fit`] solves.
pub fn normal_equations(data: &LabeledSet, alpha: f64) -> Result<(Array2<f64>, Array2<f64>)> {
    check_alpha(alpha)?;
    let (xc, tc, _, _) = centered(data);
    let mut a = xc.t().dot(&xc);
    a.diag_mut().mapv_inplace(|v| v + alpha);
    Ok((a, xc.t().dot(&tc)))
}

fn centered(data: &LabeledSet) -> (Array2<f64>, Array2<f64>, Array1<f64>, Array1<f64>) {
    let x_mean = data.x().mean_axis(Axis(0)).expect("non-empty");
    let t = signed_targets(data);
    let t_mean = t.mean_axis(Axis(0)).expect("non-empty");
    (&data.x() - &x_mean, &t - &t_mean, x_mean, t_mean)
}

pub fn ridge_fit(data: &LabeledSet, alpha: f64) -> Result<RidgeModel> {
    check_alpha(alpha)?;
    data.require_two_labels()?;
    data.check_finite()?;
    let (xc, tc, x_mean, t_mean) = centered(data);
    let w = solve_normal_equations(xc.view(), tc.view(), alpha)?; // d × c
    let bias = &t_mean - &x_mean.dot(&w);
    Ok(RidgeModel {
        alpha,
        weights: w.reversed_axes().as_standard_layout().into_owned(),
        bias,
        labels: data.labels().to_vec(),
        feature_means: x_mean,
    })
}

impl RidgeModel {
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.weights.ncols(), x)?;
        Ok(self
            .weights
            .rows()
            .into_iter()
            .zip(&self.bias)
            .map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect())
    }
}

impl Classifier for RidgeModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn dim(&self) -> usize {
        self.weights.ncols()
    }

    fn predict_index(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.decision_values(x)?))
    }
}
