//! Sentence-level bias classification through a pluggable model backend.
//!
//! [`classify`] segments an article, sends chunks of numbered sentences to
//! a [`ModelBackend`], repairs and validates whatever comes back, and maps
//! findings onto the segmented sentences.

mod align;
mod backend;
mod mock;
mod parse;
mod prompt;
mod upstream;

use std::time::Instant;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use align::{align_findings, normalize_text, trigram_jaccard, FUZZY_THRESHOLD};
pub use backend::{BackendError, CallLimits, ModelBackend};
pub use mock::{default_lexicon, MockBackend, MockLexiconError, MOCK_MODEL_ID};
pub use parse::{
    parse_model_response, ParsedResponse, RawFinding, RepairKind, RepairNote, SentenceRef,
    Unparseable,
};
pub use prompt::{build_prompt, PromptBundle, PromptError, OUTPUT_EXAMPLE, PROMPT_VERSION};
pub use upstream::{
    Credential, UpstreamBackend, UpstreamConfig, UpstreamConfigError, ENV_MODEL,
    ENV_UPSTREAM_KEY, ENV_UPSTREAM_URL,
};

use crate::extraction::Article;
use crate::segmentation::{segment, Sentence};
use crate::taxonomy::BiasType;

pub const DEFAULT_CHUNK_SIZE: usize = 60;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema,
)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMethod {
    Index,
    ExactText,
    Fuzzy,
}

/// One validated biased sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct SentenceFinding {
    pub sentence_index: usize,
    pub bias_type: BiasType,
    /// In `[0, 1]`.
    pub strength: f64,
    pub explanation: String,
    pub alignment_method: AlignmentMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig {
    pub chunk_size: usize,
    /// Maximum number of chunks in flight at once.
    pub parallelism: usize,
    /// Attempts per chunk, including the first.
    pub max_attempts: usize,
    pub limits: CallLimits,
    pub language_hint: Option<String>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            chunk_size: DEFAULT_CHUNK_SIZE,
            parallelism: 4,
            max_attempts: 2,
            limits: CallLimits::default(),
            language_hint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChunkDiagnostics {
    pub chunk: usize,
    pub first_sentence: usize,
    pub sentences: usize,
    pub attempts: usize,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub model_id: String,
    pub prompt_version: String,
    pub limits: CallLimits,
    pub chunks: Vec<ChunkDiagnostics>,
    pub notes: Vec<RepairNote>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub findings: Vec<SentenceFinding>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("article has no text to classify")]
    EmptyArticle,
    #[error("model backend unavailable for chunk {chunk} after {attempts} attempt(s): {last_error}")]
    BackendUnavailable {
        chunk: usize,
        attempts: usize,
        /// The last failure was a timeout.
        timed_out: bool,
        last_error: String,
    },
}

struct ChunkResult {
    findings: Vec<SentenceFinding>,
    notes: Vec<RepairNote>,
    diagnostics: ChunkDiagnostics,
}

async fn classify_chunk(
    chunk: usize,
    sentences: &[Sentence],
    backend: &dyn ModelBackend,
    config: &ClassifyConfig,
) -> Result<ChunkResult, ClassifyError> {
    let prompt = build_prompt(sentences, config.language_hint.as_deref())
        .map_err(|_| ClassifyError::EmptyArticle)?;
    let started = Instant::now();
    let attempts = config.max_attempts.max(1);
    let mut last_error = String::new();
    let mut timed_out = false;

    for attempt in 1..=attempts {
        let call = tokio::time::timeout(config.limits.timeout, backend.complete(&prompt, &config.limits));
        let raw = match call.await {
            Err(_) | Ok(Err(BackendError::Timeout)) => {
                timed_out = true;
                last_error = BackendError::Timeout.to_string();
                continue;
            }
            Ok(Err(e)) => {
                timed_out = false;
                last_error = e.to_string();
                continue;
            }
            Ok(Ok(raw)) => raw,
        };
        match parse_model_response(&raw) {
            Ok(parsed) => {
                let (findings, align_notes) = align_findings(&parsed.findings, sentences);
                let mut notes = parsed.notes;
                notes.extend(align_notes);
                return Ok(ChunkResult {
                    findings,
                    notes,
                    diagnostics: ChunkDiagnostics {
                        chunk,
                        first_sentence: sentences[0].index,
                        sentences: sentences.len(),
                        attempts: attempt,
                        latency_ms: started.elapsed().as_millis() as u64,
                    },
                });
            }
            Err(e) => {
                timed_out = false;
                last_error = e.to_string();
            }
        }
    }
    Err(ClassifyError::BackendUnavailable { chunk, attempts, timed_out, last_error })
}

/// Classify already segmented sentences. Any chunk failing all attempts
/// fails the whole call; partial results are never returned.
pub async fn classify_sentences(
    sentences: &[Sentence],
    backend: &dyn ModelBackend,
    config: &ClassifyConfig,
) -> Result<Classification, ClassifyError> {
    if sentences.is_empty() {
        return Err(ClassifyError::EmptyArticle);
    }
    let chunk_size = config.chunk_size.max(1);
    let calls: Vec<_> = sentences
        .chunks(chunk_size)
        .enumerate()
        .map(|(i, chunk)| classify_chunk(i, chunk, backend, config))
        .collect();
    let results: Vec<Result<ChunkResult, ClassifyError>> =
        stream::iter(calls).buffered(config.parallelism.max(1)).collect().await;

    let mut findings = Vec::new();
    let mut notes = Vec::new();
    let mut chunks = Vec::new();
    for r in results {
        let r = r?;
        findings.extend(r.findings);
        notes.extend(r.notes);
        chunks.push(r.diagnostics);
    }
    Ok(Classification {
        findings,
        diagnostics: Diagnostics {
            model_id: backend.model_id().to_string(),
            prompt_version: PROMPT_VERSION.to_string(),
            limits: config.limits.clone(),
            chunks,
            notes,
        },
    })
}

/// Segment and classify one article.
pub async fn classify(
    article: &Article,
    backend: &dyn ModelBackend,
    config: &ClassifyConfig,
) -> Result<(Vec<Sentence>, Classification), ClassifyError> {
    let sentences = segment(&article.body_text);
    let mut config = config.clone();
    if config.language_hint.is_none() {
        config.language_hint.clone_from(&article.language_hint);
    }
    let classification = classify_sentences(&sentences, backend, &config).await?;
    Ok((sentences, classification))
}

