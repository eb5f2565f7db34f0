//! Binary biased/non-biased evaluation on sentence-level datasets in the
//! BABE style: one sentence and one label per row.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classifier::{classify, ClassifyConfig, ClassifyError, ModelBackend};
use crate::extraction::Article;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Biased,
    NonBiased,
}

impl Label {
    fn parse(raw: &str) -> Option<Label> {
        match raw.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "1" | "biased" => Some(Label::Biased),
            "0" | "non_biased" => Some(Label::NonBiased),
            _ => None,
        }
    }

    pub fn is_biased(self) -> bool {
        self == Label::Biased
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub text: String,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Tsv,
    Csv,
}

impl DatasetFormat {
    /// Guess from a file extension, defaulting to TSV.
    pub fn from_path(path: &Path) -> DatasetFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Tsv,
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Vec<LabeledSentence>, DatasetError> {
    let file = std::fs::File::open(path)?;
    parse_dataset(file, format)
}

/// Parse a dataset with a header row naming `text` and `label` columns
/// (any order, case-insensitive, extra columns ignored).
pub fn parse_dataset(reader: impl Read, format: DatasetFormat) -> Result<Vec<LabeledSentence>, DatasetError> {
    let mut builder = csv::ReaderBuilder::new();
    builder.has_headers(true).flexible(true);
    if format == DatasetFormat::Tsv {
        builder.delimiter(b'\t').quoting(false);
    }
    let mut rdr = builder.from_reader(reader);

    let parse_err = |line: u64, message: String| DatasetError::Parse { line, message };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().all(|h| h.trim().is_empty()) {
        return Err(parse_err(1, "missing header row".into()));
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or_else(|| parse_err(1, format!("header has no {name:?} column")))
    };
    let (text_col, label_col) = (column("text")?, column("label")?);

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let text = record.get(text_col).unwrap_or("").trim();
        if text.is_empty() {
            return Err(parse_err(line, "empty text".into()));
        }
        let raw_label = record.get(label_col).unwrap_or("");
        let label = Label::parse(raw_label)
            .ok_or_else(|| parse_err(line, format!("unknown label {raw_label:?}")))?;
        out.push(LabeledSentence { text: text.to_string(), label });
    }
    if out.is_empty() {
        return Err(parse_err(2, "dataset has no rows".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn record(&mut self, gold: Label, predicted_biased: bool) {
        match (gold.is_biased(), predicted_biased) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub f1: f64,
    pub recall: f64,
    pub precision: f64,
    pub accuracy: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Standard binary metrics; any ratio with a zero denominator is 0.
pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Metrics { f1, recall, precision, accuracy: ratio(cm.tp + cm.tn, cm.total()) }
}

/// Run a per-sentence classifier over a dataset. A sentence counts as
/// predicted-biased when the classifier says so.
pub fn evaluate<F, E>(dataset: &[LabeledSentence], mut classify_sentence: F) -> Result<ConfusionMatrix, E>
where
    F: FnMut(&str) -> Result<bool, E>,
{
    let mut cm = ConfusionMatrix::default();
    for item in dataset {
        cm.record(item.label, classify_sentence(&item.text)?);
    }
    Ok(cm)
}

/// Evaluate a model backend, classifying every sentence as its own
/// one-sentence article. Up to `parallelism` sentences are in flight.
pub async fn evaluate_backend(
    dataset: &[LabeledSentence],
    backend: &dyn ModelBackend,
    config: &ClassifyConfig,
    parallelism: usize,
) -> Result<ConfusionMatrix, ClassifyError> {
    let calls: Vec<_> = dataset
        .iter()
        .map(|item| async move {
            let article = Article::from_text(&item.text);
            let (_, c) = classify(&article, backend, config).await?;
            Ok::<_, ClassifyError>((item.label, !c.findings.is_empty()))
        })
        .collect();
    let predictions: Vec<_> = stream::iter(calls).buffer_unordered(parallelism.max(1)).collect().await;
    let mut cm = ConfusionMatrix::default();
    for p in predictions {
        let (label, predicted) = p?;
        cm.record(label, predicted);
    }
    Ok(cm)
}

/// A coin-flip classifier. The flip for a sentence is a hash of the seed
/// and the sentence text, so predictions are reproducible per seed and do
/// not depend on dataset order.
pub fn random_baseline(seed: u64) -> impl Fn(&str) -> bool + Clone + Send + Sync {
    move |text: &str| {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(text.as_bytes());
        h.finalize()[0] & 1 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationRow {
    pub model: String,
    #[serde(flatten)]
    pub counts: ConfusionMatrix,
    #[serde(flatten)]
    pub metrics: Metrics,
}

impl EvaluationRow {
    pub fn new(model: impl Into<String>, counts: ConfusionMatrix) -> Self {
        EvaluationRow { model: model.into(), counts, metrics: metrics(&counts) }
    }
}

/// Aligned text table with TP/FP/FN/TN and the four metrics per row.
pub fn format_table(rows: &[EvaluationRow]) -> String {
    let width = rows.iter().map(|r| r.model.chars().count()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>6} {:>6} {:>6} {:>6}  {:>8} {:>6} {:>9} {:>8}",
        "Model", "TP", "FP", "FN", "TN", "F1-Score", "Recall", "Precision", "Accuracy"
    );
    for r in rows {
        let (c, m) = (&r.counts, &r.metrics);
        let _ = writeln!(
            out,
            "{:<width$}  {:>6} {:>6} {:>6} {:>6}  {:>8.3} {:>6.3} {:>9.3} {:>8.3}",
            r.model, c.tp, c.fp, c.fn_, c.tn, m.f1, m.recall, m.precision, m.accuracy
        );
    }
    out
}
