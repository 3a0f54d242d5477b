//! Acceptance suite: one PASS/FAIL line per criterion, each checked at its
//! stated tolerance and runtime budget. Runs as a plain binary so the
//! report prints in order; exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use common::*;
use hgd::classifiers::{
    finite_difference_grad, knn_fit, max_relative_error, ridge_fit, solve_normal_equations,
    Classifier, LabeledSet, LogRegModel, MlpModel, TrainConfig,
};
use hgd::dataset::parse_dataset;
use hgd::embeddings::{
    cosine, generate_synthetic_store, mean_pairwise_cosine, read_store, PairFilter,
    PoolingStrategy, SynthInventory, SynthSpec,
};
use hgd::experiments::{compute_metrics, run_cosine_analysis};
use hgd::fixtures::uniform_inventories;
use ndarray::array;
use rand::Rng;

/// Relative error floor for gradient checks: components whose magnitude is
/// below it are compared in absolute terms.
const GRAD_FLOOR: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;

fn gradient_correctness() -> Result<String> {
    let mut rng = rng(11);
    let mut worst_lr = 0.0f64;
    for _ in 0..50 {
        let (n, d, c) = (rng.random_range(4..=20), rng.random_range(1..=8), rng.random_range(2..=4));
        let (rows, labels) = random_labeled(&mut rng, n, d, c);
        let data = LabeledSet::from_rows(&rows, &labels)?;
        let l2 = rng.random_range(0.0..0.1);
        let theta: Vec<f64> = (0..LogRegModel::num_params(&data)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = LogRegModel::gradient(&data, l2, &theta);
        let numeric = finite_difference_grad(|t| LogRegModel::objective(&data, l2, t), &theta, FD_STEP)?;
        worst_lr = worst_lr.max(max_relative_error(&analytic, &numeric, GRAD_FLOOR));
    }
    let mut worst_mlp = 0.0f64;
    let hidden = [4, 3];
    for i in 0..20 {
        let (n, d, c) = (rng.random_range(3..=12), rng.random_range(1..=5), rng.random_range(2..=3));
        let (rows, labels) = random_labeled(&mut rng, n.max(c), d, c);
        let data = LabeledSet::from_rows(&rows, &labels)?;
        let cfg = TrainConfig {
            l2: rng.random_range(0.0..0.01),
            ..TrainConfig::mlp_default(i)
        };
        for steps in [0, 10] {
            let theta = MlpModel::params_after(&data, &hidden, &cfg, steps)?;
            let analytic = MlpModel::gradient(&data, &hidden, cfg.l2, &theta)?;
            let numeric = finite_difference_grad(
                |t| MlpModel::objective(&data, &hidden, cfg.l2, t).unwrap(),
                &theta,
                FD_STEP,
            )?;
            worst_mlp = worst_mlp.max(max_relative_error(&analytic, &numeric, GRAD_FLOOR));
        }
    }
    ensure!(worst_lr < 1e-5, "logreg max relative error {worst_lr:e}");
    ensure!(worst_mlp < 1e-4, "mlp max relative error {worst_mlp:e}");
    Ok(format!("logreg max rel err {worst_lr:.2e} (50), mlp {worst_mlp:.2e} (20 x 2 points)"))
}

fn ridge_exactness() -> Result<String> {
    let mut rng = rng(12);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (n, d, c) = (rng.random_range(2..=30), rng.random_range(1..=6), rng.random_range(2..=4));
        let (rows, labels) = random_labeled(&mut rng, n.max(c), d, c);
        let model = ridge_fit(&LabeledSet::from_rows(&rows, &labels)?, 1.0)?;
        let w: Vec<Vec<f64>> = model.weights.rows().into_iter().map(|r| r.to_vec()).collect();
        worst = worst.max(ridge_residual(&rows, &labels, 1.0, &w));
    }
    ensure!(worst < 1e-8, "residual {worst:e}");
    let w = solve_normal_equations(array![[1.0], [2.0]].view(), array![[-1.0], [1.0]].view(), 1.0)?;
    let err = (w[[0, 0]] - 1.0 / 6.0).abs();
    ensure!(err <= 1e-12, "hand case w = {}", w[[0, 0]]);
    Ok(format!("max residual {worst:.2e} over 100, hand case |w - 1/6| = {err:.1e}"))
}

fn knn_oracle_equivalence() -> Result<String> {
    let mut rng = rng(13);
    let mut queries = 0;
    for _ in 0..200 {
        let (n, d, c) = (rng.random_range(1..=40), rng.random_range(1..=3), rng.random_range(2..=4));
        let (rows, labels) = grid_labeled(&mut rng, n.max(c), d, c);
        let model = knn_fit(&LabeledSet::from_rows(&rows, &labels)?, 7)?;
        for _ in 0..10 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2..=2) as f64 + 0.5 * rng.random_range(0..=1) as f64).collect();
            let got = model.predict(&x)?;
            let want = knn_oracle(&rows, &labels, &x, 7);
            ensure!(got == want, "query {x:?}: model {got}, oracle {want}");
            queries += 1;
        }
    }
    Ok(format!("{queries} queries over 200 instances agree"))
}

fn metrics_oracle_check() -> Result<String> {
    let mut rng = rng(14);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(1..=50);
        let c = rng.random_range(1..=4);
        let y_true: Vec<&str> = (0..n).map(|_| LABELS[rng.random_range(0..c)]).collect();
        let y_pred: Vec<&str> = (0..n).map(|_| LABELS[rng.random_range(0..4)]).collect();
        let m = compute_metrics(&y_true, &y_pred)?;
        let (a, p, r, f) = metrics_oracle(&y_true, &y_pred);
        for (x, y) in [(m.accuracy, a), (m.precision_macro, p), (m.recall_macro, r), (m.f1_macro, f)] {
            worst = worst.max((x - y).abs());
        }
    }
    ensure!(worst < 1e-12, "max deviation {worst:e}");
    let m = compute_metrics(&["A", "A", "B", "B"], &["A", "B", "B", "B"])?;
    ensure!((m.accuracy - 0.75).abs() < 1e-9 && (m.recall_macro - 0.75).abs() < 1e-9);
    ensure!((m.f1_macro - 0.733_333_333_333_333_3).abs() < 1e-9, "f1 {}", m.f1_macro);
    Ok(format!("500 arrays, max deviation {worst:.1e}; worked example f1 {:.10}", m.f1_macro))
}

fn read_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    reader
        .records()
        .map(|r| Ok(headers.iter().map(String::from).zip(r?.iter().map(String::from)).collect()))
        .collect()
}

fn model_comparison_analog() -> Result<String> {
    let dir = tempfile::tempdir()?;
    let spec = SynthSpec::new(16, 0.5, 10.0, 0).with_inventories(uniform_inventories(40));
    let fx = write_fixture(dir.path(), "models", &spec);
    let store = dir.path().join("cli.emb");
    let run = cli(&["synth", "--spec", &p(&fx.spec), "--out", &p(&store)]);
    ensure!(run.code == 0, "synth failed: {}", run.stderr);
    let out = dir.path().join("models.csv");
    let run = cli(&[
        "compare-models", "--dataset", &p(&fx.dataset), "--store", &p(&store), "--out", &p(&out),
        "--test-fraction", "0.2", "--seed", "0", "--jobs", "1",
    ]);
    ensure!(run.code == 0, "compare-models failed: {}", run.stderr);
    let rows = read_csv(&out)?;
    ensure!(rows.len() == 5, "expected five model rows, got {}", rows.len());
    let mut summary = Vec::new();
    for row in &rows {
        let acc: f64 = row["accuracy"].parse()?;
        ensure!(row["homographs"] == "82", "{} evaluated {} homographs", row["model"], row["homographs"]);
        ensure!(acc >= 0.98, "{} mean accuracy {acc}", row["model"]);
        summary.push(format!("{} {acc:.4}", row["model"]));
    }
    Ok(summary.join(", "))
}

fn pooling_comparison_analog() -> Result<String> {
    let dir = tempfile::tempdir()?;
    let separable = SynthSpec::new(16, 0.5, 10.0, 0).with_inventories(uniform_inventories(40));
    let noise = SynthSpec {
        class_separation: 0.0,
        pooling: PoolingStrategy::AvgLastFour,
        ..separable.clone()
    };
    let a = write_fixture(dir.path(), "separable", &separable);
    let b = write_fixture(dir.path(), "noise", &noise);
    let out = dir.path().join("embeddings.csv");
    let run = cli(&[
        "compare-embeddings", "--dataset", &p(&a.dataset), "--store-last", &p(&a.store),
        "--store-avg4", &p(&b.store), "--out", &p(&out), "--test-fraction", "0.3",
    ]);
    ensure!(run.code == 0, "compare-embeddings failed: {}", run.stderr);
    let rows = read_csv(&out)?;
    let mut summary = Vec::new();
    for group in ["2", "3", "4"] {
        let acc = |store: &str| -> Result<f64> {
            let row = rows
                .iter()
                .find(|r| r["phoneme_count"] == group && r["store"] == store)
                .with_context(|| format!("no row for group {group}, store {store}"))?;
            Ok(row["mean_accuracy"].parse()?)
        };
        let (sep, noi) = (acc("last_layer")?, acc("avg_last4")?);
        ensure!(sep > noi, "group {group}: separable {sep} vs noise {noi}");
        summary.push(format!("{group}: {sep:.3} > {noi:.3}"));
    }
    Ok(summary.join(", "))
}

fn cosine_suite() -> Result<String> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ensure!((cosine(&[1.0, 0.0], &[1.0, 0.0])? - 1.0).abs() <= 1e-12);
    ensure!(cosine(&[1.0, 0.0], &[0.0, 1.0])?.abs() <= 1e-12);
    ensure!((cosine(&[1.0, 1.0], &[1.0, 0.0])? - 0.7071067811865475).abs() <= 1e-12);
    let m = mean_pairwise_cosine(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![s, s]])?;
    let oracle = (0.0 + s + s) / 3.0;
    ensure!((m - oracle).abs() <= 1e-9, "three-vector mean {m}");

    let mut rng = rng(15);
    let mut homographs = 0;
    for seed in 0..50 {
        let inventories: Vec<SynthInventory> = (0..rng.random_range(1..8))
            .map(|h| SynthInventory {
                homograph: format!("h{h}"),
                counts: (0..rng.random_range(1..=3))
                    .map(|k| (LABELS[k].to_string(), rng.random_range(1..6)))
                    .collect(),
            })
            .collect();
        let spec = SynthSpec::new(rng.random_range(2..6), 1.0, 3.0, seed).with_inventories(inventories);
        let store = generate_synthetic_store(&spec)?;
        let report = run_cosine_analysis(&store, PairFilter::All)?;
        let mass: usize = report.histogram.iter().map(|b| b.count).sum();
        ensure!(mass == report.means.len(), "store {seed}: mass {mass} vs {} homographs", report.means.len());
        ensure!(report.means.len() + report.excluded.len() == store.index().len());
        homographs += mass;
    }
    Ok(format!("analytic cases exact, 3-vector |err| {:.1e}, mass conserved over 50 stores ({homographs} homographs)", (m - oracle).abs()))
}

fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        files.insert(path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path)?);
    }
    Ok(files)
}

/// Runs every subcommand twice (the `compare-*` ones also with `--jobs 4`)
/// into fresh output directories and compares all bytes.
fn determinism() -> Result<String> {
    let dir = tempfile::tempdir()?;
    let spec = SynthSpec::new(8, 0.8, 6.0, 3).with_inventories(small_inventories(10, 12));
    let fx = write_fixture(dir.path(), "fx", &spec);
    let avg = SynthSpec {
        pooling: PoolingStrategy::AvgLastFour,
        noise_sigma: 1.5,
        ..spec.clone()
    };
    let fy = write_fixture(dir.path(), "fy", &avg);
    let homograph = spec.inventories[0].homograph.clone();

    let invocation = |out: &Path, jobs: &str| -> Vec<Vec<String>> {
        let o = |name: &str| p(&out.join(name));
        vec![
            vec!["stats".into(), "--dataset".into(), p(&fx.dataset), "--out-dir".into(), p(out)],
            vec!["validate".into(), "--dataset".into(), p(&fx.dataset), "--out-dir".into(), p(out)],
            vec!["synth".into(), "--spec".into(), p(&fx.spec), "--out".into(), o("synth.emb")],
            vec!["extract-check".into(), "--dataset".into(), p(&fx.dataset), "--store".into(), p(&fx.store)],
            vec![
                "train".into(), "--dataset".into(), p(&fx.dataset), "--store".into(), p(&fx.store),
                "--homograph".into(), homograph.clone(), "--model".into(), "forest".into(), "--out".into(), o("forest.model"),
            ],
            vec![
                "train".into(), "--dataset".into(), p(&fx.dataset), "--store".into(), p(&fx.store),
                "--homograph".into(), homograph.clone(), "--model".into(), "mlp".into(), "--out".into(), o("mlp.model"),
            ],
            vec![
                "compare-models".into(), "--dataset".into(), p(&fx.dataset), "--store".into(), p(&fx.store),
                "--out".into(), o("models.csv"), "--jobs".into(), jobs.into(),
            ],
            vec![
                "compare-models".into(), "--dataset".into(), p(&fx.dataset), "--store".into(), p(&fx.store),
                "--out".into(), o("weighted.csv"), "--jobs".into(), jobs.into(), "--weighted".into(),
            ],
            vec![
                "compare-embeddings".into(), "--dataset".into(), p(&fx.dataset), "--store-last".into(), p(&fx.store),
                "--store-avg4".into(), p(&fy.store), "--out".into(), o("embeddings.csv"), "--jobs".into(), jobs.into(),
            ],
            vec!["cosine".into(), "--store".into(), p(&fx.store), "--out".into(), o("cosine.csv")],
            vec![
                "cosine".into(), "--store".into(), p(&fx.store), "--out".into(), o("cross.csv"),
                "--pairs".into(), "cross-phoneme".into(),
            ],
        ]
    };

    let mut runs = Vec::new();
    for (tag, jobs) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let out = dir.path().join(tag);
        std::fs::create_dir(&out)?;
        let mut logs = Vec::new();
        for args in invocation(&out, jobs) {
            let run = cli(&args);
            ensure!(run.code == 0, "{} failed: {}", args[0], run.stderr);
            logs.push((run.stdout, run.stderr));
        }
        runs.push((snapshot(&out)?, logs));
    }
    ensure!(runs[0] == runs[1], "re-run with identical inputs differs");
    ensure!(runs[0] == runs[2], "--jobs 4 differs from --jobs 1");
    Ok(format!("8 subcommands, {} output files identical across 3 runs", runs[0].0.len()))
}

fn format_round_trips() -> Result<String> {
    let mut rng = rng(16);
    for i in 0..100 {
        let dataset = random_dataset(&mut rng);
        let first = dataset_bytes(&dataset);
        let back = parse_dataset(first.as_slice())?;
        ensure!(back == dataset, "dataset {i} changed on read");
        ensure!(dataset_bytes(&back) == first, "dataset {i} second write differs");

        let store = random_store(&mut rng);
        let first = store_bytes(&store);
        let back = read_store(first.as_slice())?;
        ensure!(back == store, "store {i} changed on read");
        ensure!(store_bytes(&back) == first, "store {i} second write differs");
    }
    Ok("100 datasets and 100 stores byte-identical on second write".into())
}

type Check = fn() -> Result<String>;

fn main() {
    let checks: [(&str, Duration, Check); 9] = [
        ("gradient correctness", Duration::from_secs(10), gradient_correctness),
        ("ridge exactness", Duration::from_secs(5), ridge_exactness),
        ("knn oracle equivalence", Duration::from_secs(5), knn_oracle_equivalence),
        ("metrics oracle", Duration::from_secs(2), metrics_oracle_check),
        ("model comparison analog", Duration::from_secs(300), model_comparison_analog),
        ("pooling comparison analog", Duration::from_secs(600), pooling_comparison_analog),
        ("cosine suite", Duration::from_secs(2), cosine_suite),
        ("determinism", Duration::from_secs(600), determinism),
        ("format round trips", Duration::from_secs(60), format_round_trips),
    ];
    let mut failures = 0;
    for (name, budget, check) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err(anyhow::anyhow!("panicked")));
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(_) if elapsed > budget => ("FAIL", format!("over budget of {budget:?}")),
            Ok(detail) => ("PASS", detail),
            Err(e) => ("FAIL", format!("{e:#}")),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} {name} [{:.2}s / {}s]: {detail}", elapsed.as_secs_f64(), budget.as_secs());
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
