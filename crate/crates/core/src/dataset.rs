//! Homograph corpus ingestion, validation, statistics and splitting.
//!
//! The corpus is a UTF-8, tab-separated file with the columns
//! `homograph`, `phoneme` and `sentence`. An optional header line starting
//! with `homograph` is skipped. Fields are trimmed; phoneme labels are
//! treated as opaque strings.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const COLUMNS: [&str; 3] = ["homograph", "phoneme", "sentence"];

/// One annotated sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomographRecord {
    pub record_id: usize,
    pub homograph: String,
    pub phoneme: String,
    pub sentence: String,
}

/// Ordered records plus an index from homograph to record ids.
///
/// Record ids are dense and equal to the position of the record in
/// [`Dataset::records`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    records: Vec<HomographRecord>,
    index: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Map ARABIC LETTER YEH (U+064A) to FARSI YEH (U+06CC) and ARABIC
    /// LETTER KAF (U+0643) to KEHEH (U+06A9) in every field.
    pub normalize_arabic_yeh_kaf: bool,
}

impl Dataset {
    /// Builds a dataset from `(homograph, phoneme, sentence)` triples,
    /// assigning ids in iteration order.
    pub fn from_triples<I, S>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let mut dataset = Dataset::default();
        for (i, (h, p, s)) in triples.into_iter().enumerate() {
            let fields = [h.into(), p.into(), s.into()];
            for (value, column) in fields.iter().zip(COLUMNS) {
                if value.trim().is_empty() {
                    return Err(Error::EmptyField { line: i + 1, column });
                }
            }
            let [h, p, s] = fields;
            dataset.push(h.trim().to_string(), p.trim().to_string(), s.trim().to_string());
        }
        Ok(dataset)
    }

    fn push(&mut self, homograph: String, phoneme: String, sentence: String) {
        let record_id = self.records.len();
        self.index.entry(homograph.clone()).or_default().push(record_id);
        self.records.push(HomographRecord {
            record_id,
            homograph,
            phoneme,
            sentence,
        });
    }

    pub fn records(&self) -> &[HomographRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, id: usize) -> Option<&HomographRecord> {
        self.records.get(id)
    }

    /// Homograph → record ids in file order. Keys iterate in sorted order.
    pub fn index(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.index
    }

    pub fn homographs(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn ids_for(&self, homograph: &str) -> Result<&[usize]> {
        self.index
            .get(homograph)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownHomograph(homograph.to_string()))
    }

    /// Phoneme inventory of one homograph.
    pub fn inventory(&self, homograph: &str) -> Result<PhonemeInventory> {
        let ids = self.ids_for(homograph)?;
        let mut counts = BTreeMap::new();
        for &id in ids {
            *counts.entry(self.records[id].phoneme.clone()).or_insert(0) += 1;
        }
        Ok(PhonemeInventory {
            homograph: homograph.to_string(),
            counts,
        })
    }
}

/// Distinct phoneme labels of a homograph with their sentence counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhonemeInventory {
    pub homograph: String,
    /// Phoneme → sentence count, ordered lexicographically by phoneme.
    pub counts: BTreeMap<String, usize>,
}

impl PhonemeInventory {
    pub fn phonemes(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn num_phonemes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub fn parse_dataset<R: Read>(source: R) -> Result<Dataset> {
    parse_dataset_with(source, ParseOptions::default())
}

pub fn parse_dataset_with<R: Read>(mut source: R, options: ParseOptions) -> Result<Dataset> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = match std::str::from_utf8(&bytes) {
        Ok(text) => text,
        Err(e) => {
            let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
            return Err(Error::Encoding { line });
        }
    };

    let mut dataset = Dataset::default();
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 && line.starts_with("homograph") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::ColumnCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let mut owned = [String::new(), String::new(), String::new()];
        for ((slot, value), column) in owned.iter_mut().zip(&fields).zip(COLUMNS) {
            let value = value.trim();
            if value.is_empty() {
                return Err(Error::EmptyField {
                    line: line_no,
                    column,
                });
            }
            *slot = if options.normalize_arabic_yeh_kaf {
                normalize_arabic_yeh_kaf(value)
            } else {
                value.to_string()
            };
        }
        let [h, p, s] = owned;
        dataset.push(h, p, s);
    }
    Ok(dataset)
}

pub fn normalize_arabic_yeh_kaf(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{064A}' => '\u{06CC}',
            '\u{0643}' => '\u{06A9}',
            other => other,
        })
        .collect()
}

/// Writes the dataset as TSV with a header line. Re-parsing the output
/// yields an equal dataset.
pub fn write_dataset<W: Write>(dataset: &Dataset, mut sink: W) -> Result<()> {
    writeln!(sink, "{}", COLUMNS.join("\t"))?;
    for r in &dataset.records {
        writeln!(sink, "{}\t{}\t{}", r.homograph, r.phoneme, r.sentence)?;
    }
    sink.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueKind {
    /// The sentence does not contain the homograph as a substring.
    HomographAbsent,
    /// Same (homograph, phoneme, sentence) as an earlier record.
    Duplicate { first: usize },
    /// The homograph has only one phoneme label in the whole dataset.
    SinglePhoneme,
}

impl IssueKind {
    pub fn name(&self) -> &'static str {
        match self {
            IssueKind::HomographAbsent => "homograph-absent",
            IssueKind::Duplicate { .. } => "duplicate",
            IssueKind::SinglePhoneme => "single-phoneme",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub record_id: usize,
    pub kind: IssueKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn issues_for(&self, record_id: usize) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(move |i| i.record_id == record_id)
    }
}

/// Advisory checks; never fails and never mutates the dataset.
///
/// Single-phoneme issues are attached to the first record of the homograph.
/// Issues are sorted by record id, then kind.
pub fn validate(dataset: &Dataset) -> ValidationReport {
    let mut issues = Vec::new();
    let mut seen: HashMap<(&str, &str, &str), usize> = HashMap::new();
    for r in &dataset.records {
        if !r.sentence.contains(r.homograph.as_str()) {
            issues.push(Issue {
                record_id: r.record_id,
                kind: IssueKind::HomographAbsent,
            });
        }
        let key = (r.homograph.as_str(), r.phoneme.as_str(), r.sentence.as_str());
        match seen.get(&key) {
            Some(&first) => issues.push(Issue {
                record_id: r.record_id,
                kind: IssueKind::Duplicate { first },
            }),
            None => {
                seen.insert(key, r.record_id);
            }
        }
    }
    for ids in dataset.index.values() {
        let first = &dataset.records[ids[0]];
        if ids
            .iter()
            .all(|&id| dataset.records[id].phoneme == first.phoneme)
        {
            issues.push(Issue {
                record_id: first.record_id,
                kind: IssueKind::SinglePhoneme,
            });
        }
    }
    issues.sort_by_key(|i| (i.record_id, i.kind));
    ValidationReport { issues }
}

/// Descriptive statistics of a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetStats {
    /// Whitespace token count → number of sentences.
    pub sentence_length_hist: BTreeMap<usize, usize>,
    /// 0-based token index of the homograph → number of sentences.
    pub homograph_position_hist: BTreeMap<usize, usize>,
    /// Sentences where no token matches or contains the homograph.
    pub position_unresolved: usize,
    /// Distinct phoneme count → number of homographs.
    pub phoneme_count_dist: BTreeMap<usize, usize>,
    /// Homograph length in Unicode scalars → number of distinct homographs.
    pub homograph_length_hist: BTreeMap<usize, usize>,
    pub inventories: Vec<PhonemeInventory>,
}

/// Token index of the homograph: first exact token match, otherwise the
/// first token containing it.
pub fn homograph_position(sentence: &str, homograph: &str) -> Option<usize> {
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    tokens
        .iter()
        .position(|t| *t == homograph)
        .or_else(|| tokens.iter().position(|t| t.contains(homograph)))
}

pub fn compute_stats(dataset: &Dataset) -> DatasetStats {
    let mut stats = DatasetStats::default();
    for r in &dataset.records {
        let length = r.sentence.split_whitespace().count();
        *stats.sentence_length_hist.entry(length).or_insert(0) += 1;
        match homograph_position(&r.sentence, &r.homograph) {
            Some(pos) => *stats.homograph_position_hist.entry(pos).or_insert(0) += 1,
            None => stats.position_unresolved += 1,
        }
    }
    for homograph in dataset.index.keys() {
        let inventory = dataset
            .inventory(homograph)
            .expect("index keys are known homographs");
        *stats
            .phoneme_count_dist
            .entry(inventory.num_phonemes())
            .or_insert(0) += 1;
        *stats
            .homograph_length_hist
            .entry(homograph.chars().count())
            .or_insert(0) += 1;
        stats.inventories.push(inventory);
    }
    stats
}

/// Train/test partition parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    /// Test size used when comparing embedding pooling strategies.
    pub const EMBEDDING_COMPARISON_TEST_FRACTION: f64 = 0.3;
    /// Test size used when comparing classifier families.
    pub const MODEL_COMPARISON_TEST_FRACTION: f64 = 0.2;

    pub fn new(test_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            test_fraction,
            seed,
            stratified: true,
        }
    }

    pub fn unstratified(mut self) -> Self {
        self.stratified = false;
        self
    }

    fn check(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(Error::Split(format!(
                "test fraction {} outside [0, 1)",
                self.test_fraction
            )));
        }
        Ok(())
    }
}

/// Number of test records drawn from a group of `count` records.
fn test_count(test_fraction: f64, count: usize) -> usize {
    if test_fraction == 0.0 || count < 2 {
        return 0;
    }
    let raw = (test_fraction * count as f64).round() as usize;
    raw.clamp(1, count - 1)
}

/// 64-bit FNV-1a, used to give each homograph its own random stream.
fn stream_id(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Splits one homograph's records into sorted `(train_ids, test_ids)`.
///
/// With stratification each phoneme contributes
/// `round(test_fraction * count)` test records, clamped so that any phoneme
/// with at least two records lands on both sides.
pub fn split(
    dataset: &Dataset,
    homograph: &str,
    spec: &SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.check()?;
    let ids = dataset.ids_for(homograph)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream_id(homograph));

    let groups: Vec<Vec<usize>> = if spec.stratified {
        let mut by_phoneme: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &id in ids {
            by_phoneme
                .entry(dataset.records[id].phoneme.as_str())
                .or_default()
                .push(id);
        }
        by_phoneme.into_values().collect()
    } else {
        vec![ids.to_vec()]
    };

    let mut train = Vec::with_capacity(ids.len());
    let mut test = Vec::new();
    for mut group in groups {
        let k = test_count(spec.test_fraction, group.len());
        group.shuffle(&mut rng);
        test.extend_from_slice(&group[..k]);
        train.extend_from_slice(&group[k..]);
    }
    if train.is_empty() {
        return Err(Error::Split(format!(
            "test fraction {} leaves no training records for {homograph:?}",
            spec.test_fraction
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
