//! The `hgd` command line.
//!
//! Exit codes: 0 on success, 1 on runtime failure (missing file, bad
//! format, ...) with a one-line diagnostic on stderr, 2 on usage errors.
//! Every output file is written to a temporary file and renamed into
//! place, so a failed run leaves no partial outputs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classifiers::{write_model, Classifier, ModelConfig, ModelKind};
use crate::dataset::{
    compute_stats, parse_dataset_with, split, validate, Dataset, ParseOptions, SplitSpec,
};
use crate::embeddings::{generate_synthetic_store, read_store, write_store, EmbeddingStore, PairFilter, SynthSpec};
use crate::experiments::{
    compute_metrics, run_cosine_analysis, run_embedding_comparison, run_model_comparison,
    Exclusion, RunOptions,
};
use crate::io_util::{open, write_atomic};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "hgd", version, about = "Homograph disambiguation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct DatasetArgs {
    /// Tab-separated dataset (homograph, phoneme, sentence).
    #[arg(long, value_name = "PATH")]
    pub dataset: PathBuf,
    /// Directory receiving the CSV outputs.
    #[arg(long, value_name = "PATH")]
    pub out_dir: PathBuf,
    /// Map Arabic yeh/kaf (U+064A, U+0643) to their Persian forms.
    #[arg(long)]
    pub normalize_arabic_yeh_kaf: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pairs {
    All,
    WithinPhoneme,
    CrossPhoneme,
}

impl From<Pairs> for PairFilter {
    fn from(p: Pairs) -> Self {
        match p {
            Pairs::All => PairFilter::All,
            Pairs::WithinPhoneme => PairFilter::WithinPhoneme,
            Pairs::CrossPhoneme => PairFilter::CrossPhoneme,
        }
    }
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let f: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..1.0).contains(&f) {
        Ok(f)
    } else {
        Err(format!("{f} is outside [0, 1)"))
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Write dataset histograms and phoneme inventories as CSV files.
    Stats(DatasetArgs),
    /// Report absent homographs, duplicates and single-phoneme homographs.
    Validate(DatasetArgs),
    /// Generate a synthetic embedding store from a JSON spec.
    Synth {
        #[arg(long, value_name = "PATH")]
        spec: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Check that an embedding store matches a dataset.
    ExtractCheck {
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        #[arg(long, value_name = "PATH")]
        store: PathBuf,
    },
    /// Train one classifier for one homograph and save it.
    Train {
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        #[arg(long, value_name = "PATH")]
        store: PathBuf,
        #[arg(long, value_name = "STR")]
        homograph: String,
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to 0.2.
        #[arg(long, value_parser = parse_fraction)]
        test_fraction: Option<f64>,
    },
    /// Compare classifier families across all homographs.
    CompareModels {
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        #[arg(long, value_name = "PATH")]
        store: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Comma-separated model list; all five by default.
        #[arg(long, value_enum, value_delimiter = ',')]
        models: Vec<ModelKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to 0.2.
        #[arg(long, value_parser = parse_fraction)]
        test_fraction: Option<f64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
        /// Weight the mean over homographs by record count.
        #[arg(long)]
        weighted: bool,
    },
    /// Compare last-layer and average-of-last-four stores by MLP accuracy.
    CompareEmbeddings {
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        #[arg(long, value_name = "PATH")]
        store_last: PathBuf,
        #[arg(long, value_name = "PATH")]
        store_avg4: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to 0.3.
        #[arg(long, value_parser = parse_fraction)]
        test_fraction: Option<f64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
    },
    /// Per-homograph mean pairwise cosine and its histogram.
    Cosine {
        #[arg(long, value_name = "PATH")]
        store: PathBuf,
        /// Per-homograph means; the histogram goes to `<stem>.hist.csv`.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        pairs: Pairs,
    },
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<Command, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv).map(|cli| cli.command)
}

/// Runs a command, writing diagnostics to the process's stdout/stderr.
pub fn execute(command: &Command) -> i32 {
    execute_with(command, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn execute_with(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run(command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(err, "hgd: error: {msg}");
            1
        }
    }
}

fn load_dataset(path: &Path, options: ParseOptions) -> Result<Dataset> {
    parse_dataset_with(open(path)?, options)
}

fn load_store(path: &Path) -> Result<EmbeddingStore> {
    read_store(open(path)?).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn report_exclusions(err: &mut dyn Write, excluded: &[Exclusion]) -> Result<()> {
    for e in excluded {
        writeln!(err, "excluded {}: {}", e.homograph, e.reason)?;
    }
    Ok(())
}

fn histogram_csv(hist: &BTreeMap<usize, usize>) -> Vec<u8> {
    let mut buf = b"key,count\n".to_vec();
    for (k, v) in hist {
        buf.extend_from_slice(format!("{k},{v}\n").as_bytes());
    }
    buf
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, |w| Ok(w.write_all(bytes)?))
}

fn render<F>(f: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// `cos.csv` → `cos.hist.csv`.
pub fn histogram_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cosine".into());
    out.with_file_name(format!("{stem}.hist.csv"))
}

fn run(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Stats(args) => {
            let options = ParseOptions {
                normalize_arabic_yeh_kaf: args.normalize_arabic_yeh_kaf,
            };
            let dataset = load_dataset(&args.dataset, options)?;
            let stats = compute_stats(&dataset);
            let mut inventories = b"homograph,phoneme,count\n".to_vec();
            {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(false)
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(&mut inventories);
                for inv in &stats.inventories {
                    for (p, c) in &inv.counts {
                        w.write_record([inv.homograph.as_str(), p.as_str(), &c.to_string()])
                            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                    }
                }
                w.flush()?;
            }
            let summary = format!(
                "key,value\nrecords,{}\nhomographs,{}\nposition_unresolved,{}\n",
                dataset.len(),
                dataset.index().len(),
                stats.position_unresolved
            );
            let files: Vec<(&str, Vec<u8>)> = vec![
                ("sentence_lengths.csv", histogram_csv(&stats.sentence_length_hist)),
                ("homograph_positions.csv", histogram_csv(&stats.homograph_position_hist)),
                ("phoneme_counts.csv", histogram_csv(&stats.phoneme_count_dist)),
                ("homograph_lengths.csv", histogram_csv(&stats.homograph_length_hist)),
                ("inventories.csv", inventories),
                ("summary.csv", summary.into_bytes()),
            ];
            for (name, bytes) in files {
                write_bytes(&args.out_dir.join(name), &bytes)?;
            }
            writeln!(
                out,
                "{} records, {} homographs",
                dataset.len(),
                dataset.index().len()
            )?;
        }
        Command::Validate(args) => {
            let options = ParseOptions {
                normalize_arabic_yeh_kaf: args.normalize_arabic_yeh_kaf,
            };
            let dataset = load_dataset(&args.dataset, options)?;
            let report = validate(&dataset);
            let mut buf = b"record_id,issue,related_record\n".to_vec();
            for issue in &report.issues {
                let related = match issue.kind {
                    crate::dataset::IssueKind::Duplicate { first } => first.to_string(),
                    _ => String::new(),
                };
                buf.extend_from_slice(
                    format!("{},{},{}\n", issue.record_id, issue.kind.name(), related).as_bytes(),
                );
            }
            write_bytes(&args.out_dir.join("validation.csv"), &buf)?;
            writeln!(out, "{} issue(s) in {} records", report.issues.len(), dataset.len())?;
        }
        Command::Synth { spec, out: path } => {
            let spec: SynthSpec = serde_json::from_reader(open(spec)?)
                .map_err(|e| Error::SynthSpec(format!("{}: {e}", spec.display())))?;
            let store = generate_synthetic_store(&spec)?;
            let bytes = render(|b| write_store(&store, b))?;
            write_bytes(path, &bytes)?;
            writeln!(out, "{} records, dim {}", store.len(), store.dim())?;
        }
        Command::ExtractCheck { dataset, store } => {
            let dataset = load_dataset(dataset, ParseOptions::default())?;
            let store = load_store(store)?;
            let mut problems = Vec::new();
            for r in store.records() {
                match dataset.record(r.record_id) {
                    None => problems.push(format!("record {} is not in the dataset", r.record_id)),
                    Some(d) if d.homograph != r.homograph || d.phoneme != r.phoneme => problems
                        .push(format!(
                            "record {} is ({}, {}), dataset has ({}, {})",
                            r.record_id, r.homograph, r.phoneme, d.homograph, d.phoneme
                        )),
                    Some(_) => {}
                }
            }
            if let Some(first) = problems.first() {
                return Err(Error::Argument(format!(
                    "{} inconsistent record(s); first: {first}",
                    problems.len()
                )));
            }
            let missing = dataset.len() - store.len();
            if missing > 0 {
                writeln!(err, "warning: {missing} dataset record(s) have no vector")?;
            }
            writeln!(
                out,
                "ok: {} of {} records, dim {}, pooling {}, model {}",
                store.len(),
                dataset.len(),
                store.dim(),
                store.pooling(),
                store.model_id()
            )?;
        }
        Command::Train {
            dataset,
            store,
            homograph,
            model,
            out: path,
            seed,
            test_fraction,
        } => {
            let dataset = load_dataset(dataset, ParseOptions::default())?;
            let store = load_store(store)?;
            let spec = SplitSpec::new(
                test_fraction.unwrap_or(SplitSpec::MODEL_COMPARISON_TEST_FRACTION),
                *seed,
            );
            let (train_ids, test_ids) = split(&dataset, homograph, &spec)?;
            let vector = |id: usize| {
                store
                    .vector(id)
                    .ok_or_else(|| Error::Argument(format!("record {id} has no vector")))
            };
            let rows = train_ids.iter().map(|&id| vector(id)).collect::<Result<Vec<_>>>()?;
            let labels: Vec<&str> = train_ids
                .iter()
                .map(|&id| dataset.records()[id].phoneme.as_str())
                .collect();
            let train = crate::classifiers::LabeledSet::from_rows(&rows, &labels)?;
            let fitted = ModelConfig::default_for(*model, *seed).fit(&train)?;
            let bytes = render(|b| write_model(&fitted, b))?;
            write_bytes(path, &bytes)?;
            if !test_ids.is_empty() {
                let y_true: Vec<&str> = test_ids
                    .iter()
                    .map(|&id| dataset.records()[id].phoneme.as_str())
                    .collect();
                let y_pred = test_ids
                    .iter()
                    .map(|&id| fitted.predict(vector(id)?))
                    .collect::<Result<Vec<_>>>()?;
                let m = compute_metrics(&y_true, &y_pred)?;
                writeln!(
                    out,
                    "{model} on {homograph}: accuracy {} precision {} recall {} f1 {} (n={})",
                    m.accuracy, m.precision_macro, m.recall_macro, m.f1_macro, m.support
                )?;
            }
        }
        Command::CompareModels {
            dataset,
            store,
            out: path,
            models,
            seed,
            test_fraction,
            jobs,
            weighted,
        } => {
            let dataset = load_dataset(dataset, ParseOptions::default())?;
            let store = load_store(store)?;
            let kinds: Vec<ModelKind> = if models.is_empty() {
                ModelKind::ALL.to_vec()
            } else {
                models.clone()
            };
            let configs: Vec<ModelConfig> = kinds
                .iter()
                .map(|&k| ModelConfig::default_for(k, *seed))
                .collect();
            let spec = SplitSpec::new(
                test_fraction.unwrap_or(SplitSpec::MODEL_COMPARISON_TEST_FRACTION),
                *seed,
            );
            let report = run_model_comparison(
                &dataset,
                &store,
                &configs,
                &spec,
                RunOptions {
                    jobs: usize::from(*jobs),
                    weighted: *weighted,
                },
            )?;
            let bytes = render(|b| report.write_csv(b))?;
            write_bytes(path, &bytes)?;
            report_exclusions(err, &report.excluded)?;
            for row in &report.rows {
                writeln!(out, "{}: accuracy {}", row.model, row.metrics.accuracy)?;
            }
        }
        Command::CompareEmbeddings {
            dataset,
            store_last,
            store_avg4,
            out: path,
            seed,
            test_fraction,
            jobs,
        } => {
            let dataset = load_dataset(dataset, ParseOptions::default())?;
            let last = load_store(store_last)?;
            let avg4 = load_store(store_avg4)?;
            let spec = SplitSpec::new(
                test_fraction.unwrap_or(SplitSpec::EMBEDDING_COMPARISON_TEST_FRACTION),
                *seed,
            );
            let report = run_embedding_comparison(
                &dataset,
                &last,
                &avg4,
                &spec,
                *seed,
                RunOptions {
                    jobs: usize::from(*jobs),
                    weighted: false,
                },
            )?;
            let bytes = render(|b| report.write_csv(b))?;
            write_bytes(path, &bytes)?;
            report_exclusions(err, &report.excluded)?;
        }
        Command::Cosine {
            store,
            out: path,
            pairs,
        } => {
            let store = load_store(store)?;
            let report = run_cosine_analysis(&store, (*pairs).into())?;
            let means = render(|b| report.write_means_csv(b))?;
            let hist = render(|b| report.write_histogram_csv(b))?;
            write_bytes(path, &means)?;
            write_bytes(&histogram_path(path), &hist)?;
            report_exclusions(err, &report.excluded)?;
            writeln!(out, "{} homograph(s) analysed", report.means.len())?;
        }
    }
    Ok(())
}
