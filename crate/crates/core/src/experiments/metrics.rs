use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Accuracy and macro-averaged precision, recall and F1 of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub support: usize,
}

/// Macro averages run over the labels present in `y_true`. A per-label
/// ratio with a zero denominator counts as 0.
pub fn compute_metrics<S: AsRef<str>>(y_true: &[S], y_pred: &[S]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Argument(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Argument("cannot score an empty evaluation".into()));
    }
    let n = y_true.len();
    let correct = y_true
        .iter()
        .zip(y_pred)
        .filter(|(t, p)| t.as_ref() == p.as_ref())
        .count();

    let labels: BTreeSet<&str> = y_true.iter().map(AsRef::as_ref).collect();
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    for &label in &labels {
        let mut tp = 0usize;
        let mut predicted = 0usize;
        let mut actual = 0usize;
        for (t, p) in y_true.iter().zip(y_pred) {
            let (t, p) = (t.as_ref() == label, p.as_ref() == label);
            tp += usize::from(t && p);
            predicted += usize::from(p);
            actual += usize::from(t);
        }
        let p = ratio(tp, predicted);
        let r = ratio(tp, actual);
        precision += p;
        recall += r;
        f1 += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    }
    let k = labels.len() as f64;
    Ok(Metrics {
        accuracy: correct as f64 / n as f64,
        precision_macro: precision / k,
        recall_macro: recall / k,
        f1_macro: f1 / k,
        support: n,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
