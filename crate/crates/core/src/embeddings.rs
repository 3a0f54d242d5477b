//! Embedding stores, cosine similarity and synthetic store generation.
//!
//! # Store format (`hgd-emb/1`)
//!
//! Line-delimited JSON, UTF-8, LF. The first line is a header
//!
//! ```text
//! {"format":"hgd-emb/1","dim":768,"pooling":"last_layer","model":"..."}
//! ```
//!
//! and every following line is one record
//!
//! ```text
//! {"id":0,"homograph":"...","phoneme":"...","vector":[0.25,-1.5,...]}
//! ```
//!
//! Floats are written in their shortest round-trip decimal form, so reading
//! a store back reproduces every vector bit for bit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::{Error, Result};

pub const STORE_FORMAT: &str = "hgd-emb/1";

/// How per-layer hidden states were reduced to one vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PoolingStrategy {
    #[serde(rename = "last_layer")]
    LastLayer,
    #[serde(rename = "avg_last4")]
    AvgLastFour,
}

impl PoolingStrategy {
    pub fn tag(&self) -> &'static str {
        match self {
            PoolingStrategy::LastLayer => "last_layer",
            PoolingStrategy::AvgLastFour => "avg_last4",
        }
    }
}

impl fmt::Display for PoolingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PoolingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last_layer" => Ok(PoolingStrategy::LastLayer),
            "avg_last4" => Ok(PoolingStrategy::AvgLastFour),
            other => Err(Error::Format(format!("unknown pooling tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    #[serde(rename = "id")]
    pub record_id: usize,
    pub homograph: String,
    pub phoneme: String,
    pub vector: Vec<f64>,
}

/// Vectors aligned to dataset records, plus the metadata describing how
/// they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    pooling: PoolingStrategy,
    model_id: String,
    records: Vec<EmbeddingRecord>,
    index: BTreeMap<String, Vec<usize>>,
    positions: HashMap<usize, usize>,
}

impl EmbeddingStore {
    /// Validates the records against `dim` and builds the lookup indexes.
    pub fn new(
        dim: usize,
        pooling: PoolingStrategy,
        model_id: impl Into<String>,
        records: Vec<EmbeddingRecord>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Format("dim must be positive".into()));
        }
        let mut index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut positions = HashMap::with_capacity(records.len());
        for (pos, r) in records.iter().enumerate() {
            if r.vector.len() != dim {
                return Err(Error::Format(format!(
                    "record {} has {} components, header dim is {dim}",
                    r.record_id,
                    r.vector.len()
                )));
            }
            if r.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!(
                    "record {} has a non-finite component",
                    r.record_id
                )));
            }
            if positions.insert(r.record_id, pos).is_some() {
                return Err(Error::Format(format!("duplicate record id {}", r.record_id)));
            }
            index.entry(r.homograph.clone()).or_default().push(r.record_id);
        }
        Ok(EmbeddingStore {
            dim,
            pooling,
            model_id: model_id.into(),
            records,
            index,
            positions,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pooling(&self) -> PoolingStrategy {
        self.pooling
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Homograph → record ids in store order.
    pub fn index(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.index
    }

    pub fn get(&self, record_id: usize) -> Option<&EmbeddingRecord> {
        self.positions.get(&record_id).map(|&p| &self.records[p])
    }

    pub fn vector(&self, record_id: usize) -> Option<&[f64]> {
        self.get(record_id).map(|r| r.vector.as_slice())
    }

    pub fn contains(&self, record_id: usize) -> bool {
        self.positions.contains_key(&record_id)
    }
}

#[derive(Serialize)]
struct HeaderOut<'a> {
    format: &'a str,
    dim: usize,
    pooling: &'a str,
    model: &'a str,
}

#[derive(Deserialize)]
struct HeaderIn {
    format: String,
    dim: usize,
    pooling: String,
    model: String,
}

pub fn write_store<W: Write>(store: &EmbeddingStore, mut sink: W) -> Result<()> {
    let header = HeaderOut {
        format: STORE_FORMAT,
        dim: store.dim,
        pooling: store.pooling.tag(),
        model: &store.model_id,
    };
    serde_json::to_writer(&mut sink, &header)?;
    sink.write_all(b"\n")?;
    for r in &store.records {
        serde_json::to_writer(&mut sink, r)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_store<R: BufRead>(mut source: R) -> Result<EmbeddingStore> {
    let mut line = String::new();
    let mut line_no = 0;
    let mut next_line = |line: &mut String| -> Result<bool> {
        line.clear();
        let n = source.read_line(line).map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Format("store is not valid UTF-8".into()),
            _ => Error::Io(e),
        })?;
        if n == 0 {
            return Ok(false);
        }
        if !line.ends_with('\n') {
            return Err(Error::Format("truncated stream: last line has no newline".into()));
        }
        line.pop();
        Ok(true)
    };

    if !next_line(&mut line)? {
        return Err(Error::Format("truncated stream: missing header".into()));
    }
    let header: HeaderIn = serde_json::from_str(&line)
        .map_err(|e| Error::Format(format!("line 1: bad header: {e}")))?;
    if header.format != STORE_FORMAT {
        return Err(Error::Format(format!(
            "unsupported format {:?}, expected {STORE_FORMAT:?}",
            header.format
        )));
    }
    let pooling: PoolingStrategy = header.pooling.parse()?;

    let mut records = Vec::new();
    while next_line(&mut line)? {
        line_no += 1;
        let record: EmbeddingRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("line {}: bad record: {e}", line_no + 1)))?;
        if record.vector.len() != header.dim {
            return Err(Error::Format(format!(
                "record {} has {} components, header dim is {}",
                record.record_id,
                record.vector.len(),
                header.dim
            )));
        }
        records.push(record);
    }
    EmbeddingStore::new(header.dim, pooling, header.model, records)
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Cosine of the angle between `u` and `v`, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 {
        return Err(Error::DegenerateVector("first argument".into()));
    }
    if nv == 0.0 {
        return Err(Error::DegenerateVector("second argument".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Which unordered pairs enter a mean pairwise cosine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairFilter {
    #[default]
    All,
    /// Only pairs sharing a phoneme label.
    WithinPhoneme,
    /// Only pairs with different phoneme labels.
    CrossPhoneme,
}

/// Mean cosine over all unordered pairs `i < j`.
pub fn mean_pairwise_cosine<V: AsRef<[f64]>>(vectors: &[V]) -> Result<f64> {
    mean_pairwise_cosine_filtered(vectors, None::<&[&str]>, PairFilter::All)
}

/// Mean cosine over the unordered pairs admitted by `filter`. `labels` is
/// required for the phoneme-based filters.
pub fn mean_pairwise_cosine_filtered<V, L>(
    vectors: &[V],
    labels: Option<&[L]>,
    filter: PairFilter,
) -> Result<f64>
where
    V: AsRef<[f64]>,
    L: AsRef<str>,
{
    if vectors.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} vector(s), need at least 2",
            vectors.len()
        )));
    }
    if let Some(labels) = labels {
        if labels.len() != vectors.len() {
            return Err(Error::Argument("one label per vector required".into()));
        }
    } else if filter != PairFilter::All {
        return Err(Error::Argument("phoneme pair filters need labels".into()));
    }
    let dim = vectors[0].as_ref().len();
    let mut unit = Vec::with_capacity(vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: v.len(),
            });
        }
        let n = norm(v);
        if n == 0.0 {
            return Err(Error::DegenerateVector(format!("index {i}")));
        }
        unit.push(n);
    }

    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let keep = match (filter, labels) {
                (PairFilter::All, _) => true,
                (PairFilter::WithinPhoneme, Some(l)) => l[i].as_ref() == l[j].as_ref(),
                (PairFilter::CrossPhoneme, Some(l)) => l[i].as_ref() != l[j].as_ref(),
                _ => unreachable!(),
            };
            if keep {
                let c = dot(vectors[i].as_ref(), vectors[j].as_ref()) / (unit[i] * unit[j]);
                sum += c.clamp(-1.0, 1.0);
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(Error::InsufficientData("no pairs pass the filter".into()));
    }
    Ok(sum / pairs as f64)
}

/// Per-homograph class sizes for synthetic generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthInventory {
    pub homograph: String,
    /// Phoneme → number of records.
    pub counts: BTreeMap<String, usize>,
}

/// Parameters of a synthetic store. Serialized as the JSON document read
/// by `hgd synth --spec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub dim: usize,
    pub noise_sigma: f64,
    /// Minimum Euclidean distance between class means of one homograph.
    pub class_separation: f64,
    pub inventories: Vec<SynthInventory>,
    pub seed: u64,
    #[serde(default = "default_pooling")]
    pub pooling: PoolingStrategy,
    #[serde(default = "default_synth_model")]
    pub model: String,
}

fn default_pooling() -> PoolingStrategy {
    PoolingStrategy::LastLayer
}

fn default_synth_model() -> String {
    "synthetic".to_string()
}

impl SynthSpec {
    pub fn new(dim: usize, noise_sigma: f64, class_separation: f64, seed: u64) -> Self {
        SynthSpec {
            dim,
            noise_sigma,
            class_separation,
            inventories: Vec::new(),
            seed,
            pooling: default_pooling(),
            model: default_synth_model(),
        }
    }

    pub fn with_inventories(mut self, inventories: Vec<SynthInventory>) -> Self {
        self.inventories = inventories;
        self
    }

    fn check(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::SynthSpec("dim must be positive".into()));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::SynthSpec("noise_sigma must be finite and >= 0".into()));
        }
        if !self.class_separation.is_finite() || self.class_separation < 0.0 {
            return Err(Error::SynthSpec("class_separation must be finite and >= 0".into()));
        }
        if self.dim < 2
            && self.class_separation > 0.0
            && self.inventories.iter().any(|inv| inv.counts.len() >= 2)
        {
            return Err(Error::SynthSpec(
                "dim must be at least 2 to separate two or more classes".into(),
            ));
        }
        Ok(())
    }

    /// Class means in generation order: homographs as listed, phonemes
    /// sorted. Means of one homograph sit on a regular polygon in a random
    /// plane, so every pair is at least `class_separation` apart.
    pub fn class_means(&self) -> Result<Vec<(String, String, Vec<f64>)>> {
        self.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(0);
        let mut means = Vec::new();
        for inv in &self.inventories {
            let m = inv.counts.len();
            let radius = if m <= 2 {
                self.class_separation / 2.0
            } else {
                self.class_separation / (2.0 * (std::f64::consts::PI / m as f64).sin())
            };
            let (u, v) = random_orthonormal_pair(&mut rng, self.dim);
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            for (k, phoneme) in inv.counts.keys().enumerate() {
                let angle = phase + std::f64::consts::TAU * k as f64 / m as f64;
                let (c, s) = (angle.cos(), angle.sin());
                let mean = u
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| radius * (c * a + s * b))
                    .collect();
                means.push((inv.homograph.clone(), phoneme.clone(), mean));
            }
        }
        Ok(means)
    }
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Two orthonormal directions; in one dimension the second is zero.
fn random_orthonormal_pair<R: Rng>(rng: &mut R, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let u = random_unit(rng, dim);
    if dim < 2 {
        return (u, vec![0.0; dim]);
    }
    loop {
        let mut v = random_unit(rng, dim);
        let proj = dot(&u, &v);
        v.iter_mut().zip(&u).for_each(|(x, a)| *x -= proj * a);
        let n = norm(&v);
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            return (u, v);
        }
    }
}

/// Deterministic store of Gaussian clusters, one per (homograph, phoneme).
/// Record ids are dense from 0 in [`SynthSpec::class_means`] order.
pub fn generate_synthetic_store(spec: &SynthSpec) -> Result<EmbeddingStore> {
    let means = spec.class_means()?;
    let mut noise = ChaCha8Rng::seed_from_u64(spec.seed);
    noise.set_stream(1);
    let counts = spec
        .inventories
        .iter()
        .flat_map(|inv| inv.counts.values().copied());
    let mut records = Vec::new();
    for ((homograph, phoneme, mean), count) in means.into_iter().zip(counts) {
        for _ in 0..count {
            let vector = mean
                .iter()
                .map(|m| {
                    let z: f64 = noise.sample(StandardNormal);
                    m + spec.noise_sigma * z
                })
                .collect();
            records.push(EmbeddingRecord {
                record_id: records.len(),
                homograph: homograph.clone(),
                phoneme: phoneme.clone(),
                vector,
            });
        }
    }
    EmbeddingStore::new(spec.dim, spec.pooling, spec.model.clone(), records)
}

/// Dataset whose records line up id-for-id with
/// [`generate_synthetic_store`] output for the same spec.
pub fn synthetic_dataset(spec: &SynthSpec) -> Result<Dataset> {
    let mut triples = Vec::new();
    for inv in &spec.inventories {
        for (phoneme, &count) in &inv.counts {
            for i in 0..count {
                triples.push((
                    inv.homograph.clone(),
                    phoneme.clone(),
                    format!("{} sentence {i} of {phoneme}", inv.homograph),
                ));
            }
        }
    }
    Dataset::from_triples(triples)
}
