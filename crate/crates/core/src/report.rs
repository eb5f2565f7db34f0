//! The bias report: validated findings, article score and provenance, with
//! JSON and plain-text renderings.

use std::fmt::Write as _;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    classify, ClassifyConfig, ClassifyError, ModelBackend, RepairNote, SentenceFinding, PROMPT_VERSION,
};
use crate::extraction::Article;
use crate::scoring::{article_score, ArticleScore, SCORE_FORMULA_VERSION};
use crate::segmentation::Sentence;
use crate::taxonomy::TAXONOMY_VERSION;

/// Tolerance when checking a stored score against its recomputation.
const SCORE_EPSILON: f64 = 1e-9;

/// Article metadata carried in a report. The body is only included when
/// the caller asks for it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize, schemars::JsonSchema)]
pub struct ReportArticle {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub byline: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_text: Option<String>,
}

impl ReportArticle {
    pub fn from_article(article: &Article, echo_body: bool) -> Self {
        ReportArticle {
            title: article.title.clone(),
            byline: article.byline.clone(),
            source_url: article.source_url.clone(),
            language_hint: article.language_hint.clone(),
            body_text: echo_body.then(|| article.body_text.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct Provenance {
    pub model_id: String,
    pub prompt_version: String,
    pub taxonomy_version: String,
    pub score_formula_version: String,
    pub created_at: DateTime<Utc>,
    /// Set by the service when the report was served from its cache.
    #[serde(default)]
    pub cache_hit: bool,
}

impl Provenance {
    /// Provenance for a report produced now by `model_id` with the current
    /// prompt, taxonomy and score formula.
    pub fn current(model_id: impl Into<String>) -> Self {
        Provenance {
            model_id: model_id.into(),
            prompt_version: PROMPT_VERSION.to_string(),
            taxonomy_version: TAXONOMY_VERSION.to_string(),
            score_formula_version: SCORE_FORMULA_VERSION.to_string(),
            created_at: Utc::now().trunc_subsecs(0),
            cache_hit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct BiasReport {
    pub article: ReportArticle,
    pub sentences: Vec<Sentence>,
    pub findings: Vec<SentenceFinding>,
    pub score: ArticleScore,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<RepairNote>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("inconsistent report: {0}")]
    Inconsistent(String),
    #[error("schema error at {path:?}: {message}")]
    SchemaError { path: String, message: String },
}

/// Assemble a report, checking that its parts agree with each other.
pub fn build_report(
    article: ReportArticle,
    sentences: Vec<Sentence>,
    mut findings: Vec<SentenceFinding>,
    score: ArticleScore,
    provenance: Provenance,
) -> Result<BiasReport, ReportError> {
    findings.sort_by_key(|f| f.sentence_index);
    let report = BiasReport { article, sentences, findings, score, provenance, diagnostics: Vec::new() };
    report.validate()?;
    Ok(report)
}

impl BiasReport {
    pub fn with_diagnostics(mut self, notes: Vec<RepairNote>) -> Self {
        self.diagnostics = notes;
        self
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::Inconsistent(m));
        for (pos, s) in self.sentences.iter().enumerate() {
            if s.index != pos {
                return bad(format!("sentence at position {pos} has index {}", s.index));
            }
            if s.start > s.end || s.text.trim().is_empty() {
                return bad(format!("sentence {pos} has an invalid span or empty text"));
            }
        }
        let n = self.sentences.len();
        for f in &self.findings {
            if f.sentence_index >= n {
                return bad(format!("finding index {} out of range for {n} sentences", f.sentence_index));
            }
            if !(0.0..=1.0).contains(&f.strength) {
                return bad(format!("finding strength {} outside [0, 1]", f.strength));
            }
            if f.explanation.trim().is_empty() {
                return bad(format!("finding for sentence {} has no explanation", f.sentence_index));
            }
        }
        let recomputed = article_score(&self.findings, n).map_err(|e| ReportError::Inconsistent(e.to_string()))?;
        let close = |a: f64, b: f64| (a - b).abs() <= SCORE_EPSILON;
        let s = &self.score;
        if s.biased_count != recomputed.biased_count
            || s.total_sentences != recomputed.total_sentences
            || !close(s.biased_ratio, recomputed.biased_ratio)
            || !close(s.mean_strength, recomputed.mean_strength)
            || !close(s.score, recomputed.score)
        {
            return bad("stored score does not match the findings".into());
        }
        Ok(())
    }

    /// Plain-text summary: header, then one block per finding in sentence
    /// order.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let title = if self.article.title.is_empty() { "(untitled)" } else { &self.article.title };
        let _ = writeln!(out, "Bias report: {title}");
        if let Some(url) = &self.article.source_url {
            let _ = writeln!(out, "Source: {url}");
        }
        let s = &self.score;
        // Snap away float noise first so 0.575 shows as 58%, not 57%.
        let percent = ((s.score * 100.0 * 1e9).round() / 1e9).round();
        let _ = writeln!(out, "Overall bias score: {percent:.0}%");
        let _ = writeln!(
            out,
            "Biased sentences: {} of {} sentences (mean strength {:.2})",
            s.biased_count, s.total_sentences, s.mean_strength
        );
        let p = &self.provenance;
        let _ = writeln!(out, "Model: {} | prompt {} | taxonomy {}", p.model_id, p.prompt_version, p.taxonomy_version);

        let mut findings: Vec<&SentenceFinding> = self.findings.iter().collect();
        findings.sort_by_key(|f| f.sentence_index);
        for (n, f) in findings.iter().enumerate() {
            let sentence = &self.sentences[f.sentence_index];
            let _ = writeln!(out);
            let _ = writeln!(out, "[{}] Sentence {}: {}", n + 1, f.sentence_index + 1, sentence.text);
            let _ = writeln!(out, "    Type: {}", f.bias_type.canonical_name());
            let _ = writeln!(out, "    Strength: {:.2}", f.strength);
            let _ = writeln!(out, "    Explanation: {}", f.explanation);
            if sentence.contains_quotation {
                let _ = writeln!(out, "    Note: the sentence contains a quotation, which may not be the outlet's own voice.");
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<BiasReport, ReportError> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let report: BiasReport = serde_path_to_error::deserialize(de).map_err(schema_error)?;
        report.validate()?;
        Ok(report)
    }
}

fn schema_error(err: serde_path_to_error::Error<serde_json::Error>) -> ReportError {
    use serde_path_to_error::Segment;

    let mut path = String::new();
    for seg in err.path().iter() {
        path.push('/');
        match seg {
            Segment::Seq { index } => path.push_str(&index.to_string()),
            Segment::Map { key } => path.push_str(key),
            Segment::Enum { variant } => path.push_str(variant),
            Segment::Unknown => path.push('?'),
        }
    }
    let message = err.inner().to_string();
    // Missing fields are reported at the enclosing object; point at the field.
    if let Some(rest) = message.strip_prefix("missing field `") {
        if let Some(field) = rest.split('`').next() {
            path.push('/');
            path.push_str(field);
        }
    }
    if path.is_empty() {
        path.push('/');
    }
    ReportError::SchemaError { path, message }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Segment, classify, score and assemble the report for one article.
pub async fn analyze(
    article: &Article,
    backend: &dyn ModelBackend,
    config: &ClassifyConfig,
    echo_body: bool,
) -> Result<BiasReport, AnalyzeError> {
    let (sentences, classification) = classify(article, backend, config).await?;
    let score = article_score(&classification.findings, sentences.len())
        .map_err(|e| ReportError::Inconsistent(e.to_string()))?;
    let report = build_report(
        ReportArticle::from_article(article, echo_body),
        sentences,
        classification.findings,
        score,
        Provenance::current(backend.model_id()),
    )?;
    Ok(report.with_diagnostics(classification.diagnostics.notes))
}

pub fn render_text(report: &BiasReport) -> String {
    report.render_text()
}

pub fn to_json(report: &BiasReport) -> String {
    report.to_json()
}

pub fn from_json(s: &str) -> Result<BiasReport, ReportError> {
    BiasReport::from_json(s)
}

/// JSON Schema of the report wire format.
pub fn report_schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(BiasReport)).expect("schema serializes")
}
