//! `hgd-model/1` model files.
//!
//! Two JSON lines: a header
//! `{"format":"hgd-model/1","kind":...,"labels":[...],"dim":...,"hyperparameters":{...}}`
//! followed by the full parameter body of the model. Floats use the
//! shortest round-trip representation, so a reloaded model predicts
//! exactly like the original.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Classifier, ClassifierModel, ModelKind};
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "hgd-model/1";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    kind: ModelKind,
    labels: Vec<String>,
    dim: usize,
    hyperparameters: Value,
}

fn hyperparameters(model: &ClassifierModel) -> Value {
    match model {
        ClassifierModel::Knn(m) => json!({ "k": m.k }),
        ClassifierModel::LogReg(m) => json!({ "train": m.config, "iterations": m.iterations }),
        ClassifierModel::Ridge(m) => json!({ "alpha": m.alpha }),
        ClassifierModel::Mlp(m) => json!({
            "layer_sizes": m.layer_sizes,
            "train": m.config,
            "iterations": m.iterations,
        }),
        ClassifierModel::Forest(m) => json!({ "n_trees": m.n_trees, "seed": m.seed }),
    }
}

pub fn write_model<W: Write>(model: &ClassifierModel, mut sink: W) -> Result<()> {
    let header = Header {
        format: MODEL_FORMAT.to_string(),
        kind: model.kind(),
        labels: model.labels().to_vec(),
        dim: model.dim(),
        hyperparameters: hyperparameters(model),
    };
    serde_json::to_writer(&mut sink, &header)?;
    sink.write_all(b"\n")?;
    match model {
        ClassifierModel::Knn(m) => serde_json::to_writer(&mut sink, m)?,
        ClassifierModel::LogReg(m) => serde_json::to_writer(&mut sink, m)?,
        ClassifierModel::Ridge(m) => serde_json::to_writer(&mut sink, m)?,
        ClassifierModel::Mlp(m) => serde_json::to_writer(&mut sink, m)?,
        ClassifierModel::Forest(m) => serde_json::to_writer(&mut sink, m)?,
    }
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

pub fn read_model<R: BufRead>(source: R) -> Result<ClassifierModel> {
    let mut lines = source.lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("missing {what} line")))?
            .map_err(Error::Io)
    };
    let header: Header = serde_json::from_str(&next("header")?)
        .map_err(|e| Error::ModelFormat(format!("bad header: {e}")))?;
    if header.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!(
            "unsupported format {:?}, expected {MODEL_FORMAT:?}",
            header.format
        )));
    }
    let body = next("body")?;
    let bad = |e: serde_json::Error| Error::ModelFormat(format!("bad body: {e}"));
    let model = match header.kind {
        ModelKind::Knn => ClassifierModel::Knn(serde_json::from_str(&body).map_err(bad)?),
        ModelKind::LogReg => ClassifierModel::LogReg(serde_json::from_str(&body).map_err(bad)?),
        ModelKind::Ridge => ClassifierModel::Ridge(serde_json::from_str(&body).map_err(bad)?),
        ModelKind::Mlp => ClassifierModel::Mlp(serde_json::from_str(&body).map_err(bad)?),
        ModelKind::Forest => ClassifierModel::Forest(serde_json::from_str(&body).map_err(bad)?),
    };
    if model.labels() != header.labels.as_slice() || model.dim() != header.dim {
        return Err(Error::ModelFormat("header does not match body".into()));
    }
    Ok(model)
}
