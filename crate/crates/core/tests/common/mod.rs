//! Shared generators and independent oracles for the integration tests.
//! The oracles deliberately avoid the library's own helpers.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use hgd::cli::{execute_with, parse_args};
use hgd::dataset::{write_dataset, Dataset};
use hgd::embeddings::{
    generate_synthetic_store, synthetic_dataset, write_store, EmbeddingRecord, EmbeddingStore,
    PoolingStrategy, SynthInventory, SynthSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const LABELS: [&str; 4] = ["gel", "gol", "sar", "ser"];

/// `n` rows of dimension `d` with labels drawn from the first `c`; the first
/// `c` rows cover every label.
pub fn random_labeled(rng: &mut ChaCha8Rng, n: usize, d: usize, c: usize) -> (Vec<Vec<f64>>, Vec<&'static str>) {
    assert!(n >= c);
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let labels = (0..n)
        .map(|i| if i < c { LABELS[i] } else { LABELS[rng.random_range(0..c)] })
        .collect();
    (rows, labels)
}

/// Rows on a small integer grid, so distance and vote ties are common.
pub fn grid_labeled(rng: &mut ChaCha8Rng, n: usize, d: usize, c: usize) -> (Vec<Vec<f64>>, Vec<&'static str>) {
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-2..=2) as f64).collect())
        .collect();
    let labels = (0..n)
        .map(|i| if i < c { LABELS[i] } else { LABELS[rng.random_range(0..c)] })
        .collect();
    (rows, labels)
}

/// Exhaustive k-NN: sort every training point by (distance, index), vote
/// among the first `min(k, n)`, break vote ties by smaller mean distance and
/// then by lexicographic label.
pub fn knn_oracle(rows: &[Vec<f64>], labels: &[&str], x: &[f64], k: usize) -> String {
    let mut order: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i))
        .collect();
    order.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for &(dist, i) in order.iter().take(k.min(rows.len())) {
        let e = tally.entry(labels[i]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += dist;
    }
    let mut cands: Vec<(usize, f64, &str)> = tally
        .into_iter()
        .map(|(l, (count, sum))| (count, sum / count as f64, l))
        .collect();
    cands.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.cmp(b.2))
    });
    cands[0].2.to_string()
}

/// `(accuracy, precision, recall, f1)` from an explicit confusion matrix,
/// macro-averaged over the labels of `y_true`.
pub fn metrics_oracle(y_true: &[&str], y_pred: &[&str]) -> (f64, f64, f64, f64) {
    let mut all: Vec<&str> = y_true.iter().chain(y_pred).copied().collect();
    all.sort();
    all.dedup();
    let pos = |l: &str| all.iter().position(|x| *x == l).unwrap();
    let mut cm = vec![vec![0usize; all.len()]; all.len()];
    for (t, p) in y_true.iter().zip(y_pred) {
        cm[pos(t)][pos(p)] += 1;
    }
    let n = y_true.len() as f64;
    let acc = (0..all.len()).map(|i| cm[i][i]).sum::<usize>() as f64 / n;
    let present: BTreeSet<&str> = y_true.iter().copied().collect();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for l in &present {
        let i = pos(l);
        let tp = cm[i][i];
        let row: usize = cm[i].iter().sum();
        let col: usize = cm.iter().map(|r| r[i]).sum();
        let (pi, ri) = (ratio(tp, col), ratio(tp, row));
        p += pi;
        r += ri;
        f += if pi + ri == 0.0 { 0.0 } else { 2.0 * pi * ri / (pi + ri) };
    }
    let m = present.len() as f64;
    (acc, p / m, r / m, f / m)
}

/// ∞-norm of `(XcᵀXc + αI)w_c − Xcᵀt_c` over all labels, built with plain
/// loops from the raw rows. `weights` is `c × d`, labels sorted.
pub fn ridge_residual(rows: &[Vec<f64>], labels: &[&str], alpha: f64, weights: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let d = rows[0].len();
    let classes: BTreeSet<&str> = labels.iter().copied().collect();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let xc: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&mean).map(|(a, m)| a - m).collect()).collect();
    let mut worst = 0.0f64;
    for (c, class) in classes.iter().enumerate() {
        let t: Vec<f64> = labels.iter().map(|l| if l == class { 1.0 } else { -1.0 }).collect();
        let tm = t.iter().sum::<f64>() / n as f64;
        for a in 0..d {
            let mut lhs = alpha * weights[c][a];
            for b in 0..d {
                let g: f64 = (0..n).map(|i| xc[i][a] * xc[i][b]).sum();
                lhs += g * weights[c][b];
            }
            let rhs: f64 = (0..n).map(|i| xc[i][a] * (t[i] - tm)).sum();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

const CHARS: [char; 14] = ['ا', 'ب', 'س', 'ر', 'ک', 'ی', 'ه', 'ن', 'a', 'z', '0', '.', '«', '»'];

fn word(rng: &mut ChaCha8Rng, max: usize) -> String {
    let len = rng.random_range(1..=max);
    (0..len).map(|_| CHARS[rng.random_range(0..CHARS.len())]).collect()
}

/// A dataset of 1–30 records over up to five homographs; sentences hold
/// internal spaces but no tabs or edge whitespace.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let homographs: Vec<String> = (0..rng.random_range(1..=5)).map(|_| word(rng, 4)).collect();
    let n = rng.random_range(1..=30);
    let triples: Vec<(String, String, String)> = (0..n)
        .map(|_| {
            let h = homographs[rng.random_range(0..homographs.len())].clone();
            let p = LABELS[rng.random_range(0..4)].to_string();
            let words: Vec<String> = (0..rng.random_range(1..8)).map(|_| word(rng, 6)).collect();
            (h, p, words.join(" "))
        })
        .collect();
    Dataset::from_triples(triples).unwrap()
}

fn random_component(rng: &mut ChaCha8Rng) -> f64 {
    let mantissa: f64 = rng.random_range(-1.0..1.0);
    let exp = rng.random_range(-30..30);
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => (mantissa * 1000.0).round() / 8.0,
        _ => mantissa * 10f64.powi(exp),
    }
}

/// A store with random dim, pooling, sparse ids and wide-ranging floats.
pub fn random_store(rng: &mut ChaCha8Rng) -> EmbeddingStore {
    let dim = rng.random_range(1..=8);
    let mut id = 0;
    let records = (0..rng.random_range(0..12))
        .map(|_| {
            id += rng.random_range(1..4);
            EmbeddingRecord {
                record_id: id,
                homograph: word(rng, 3),
                phoneme: LABELS[rng.random_range(0..4)].to_string(),
                vector: (0..dim).map(|_| random_component(rng)).collect(),
            }
        })
        .collect();
    let pooling = if rng.random_bool(0.5) {
        PoolingStrategy::LastLayer
    } else {
        PoolingStrategy::AvgLastFour
    };
    EmbeddingStore::new(dim, pooling, format!("model-{}", word(rng, 3)), records).unwrap()
}

pub fn store_bytes(store: &EmbeddingStore) -> Vec<u8> {
    let mut buf = Vec::new();
    write_store(store, &mut buf).unwrap();
    buf
}

pub fn dataset_bytes(dataset: &Dataset) -> Vec<u8> {
    let mut buf = Vec::new();
    write_dataset(dataset, &mut buf).unwrap();
    buf
}

/// `count` records per phoneme for the first `homographs` inventories of
/// the built-in table.
pub fn small_inventories(homographs: usize, count: usize) -> Vec<SynthInventory> {
    let mut inv = hgd::fixtures::uniform_inventories(count);
    // keep the four-phoneme homograph so every group is present
    let four = inv.iter().position(|i| i.counts.len() == 4).unwrap();
    let three = inv.iter().position(|i| i.counts.len() == 3).unwrap();
    let mut picked: Vec<SynthInventory> = vec![inv[four].clone(), inv[three].clone()];
    inv.retain(|i| i.counts.len() == 2);
    picked.extend(inv.into_iter().take(homographs.saturating_sub(2)));
    picked
}

/// Writes the dataset, synth spec and store of `spec` into `dir`.
pub struct Fixture {
    pub dataset: PathBuf,
    pub spec: PathBuf,
    pub store: PathBuf,
}

pub fn write_fixture(dir: &Path, name: &str, spec: &SynthSpec) -> Fixture {
    let f = Fixture {
        dataset: dir.join(format!("{name}.tsv")),
        spec: dir.join(format!("{name}.json")),
        store: dir.join(format!("{name}.emb")),
    };
    std::fs::write(&f.dataset, dataset_bytes(&synthetic_dataset(spec).unwrap())).unwrap();
    std::fs::write(&f.spec, serde_json::to_vec_pretty(spec).unwrap()).unwrap();
    std::fs::write(&f.store, store_bytes(&generate_synthetic_store(spec).unwrap())).unwrap();
    f
}

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses and executes in-process, mapping usage errors to exit code 2.
pub fn cli<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> CliRun {
    let mut argv: Vec<std::ffi::OsString> = vec!["hgd".into()];
    argv.extend(args.iter().map(|a| a.as_ref().to_os_string()));
    match parse_args(argv) {
        Err(e) => CliRun {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: e.to_string(),
        },
        Ok(cmd) => {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let code = execute_with(&cmd, &mut out, &mut err);
            CliRun {
                code,
                stdout: String::from_utf8(out).unwrap(),
                stderr: String::from_utf8(err).unwrap(),
            }
        }
    }
}

pub fn p(path: &Path) -> String {
    path.to_str().unwrap().to_string()
}
