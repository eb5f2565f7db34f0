//! Article-level bias score.
//!
//! The score is the mean of two components that both lie in `[0, 1]`: the
//! fraction of sentences flagged as biased, and the mean strength of the
//! flagged sentences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::SentenceFinding;

/// Identifies the normalization rule; embedded in report provenance.
pub const SCORE_FORMULA_VERSION: &str = "sum_over_2/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct ArticleScore {
    pub biased_ratio: f64,
    pub mean_strength: f64,
    pub score: f64,
    pub biased_count: usize,
    pub total_sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("an article needs at least one sentence")]
    NoSentences,
    #[error("finding index {index} out of range for {total} sentences")]
    IndexOutOfRange { index: usize, total: usize },
    #[error("more than one finding for sentence {0}")]
    DuplicateIndex(usize),
}

pub fn article_score(
    findings: &[SentenceFinding],
    total_sentences: usize,
) -> Result<ArticleScore, ScoreError> {
    if total_sentences == 0 {
        return Err(ScoreError::NoSentences);
    }
    // Sum in sentence order so the result does not depend on input order,
    // not even in the last bit.
    let mut indexed: Vec<(usize, f64)> =
        findings.iter().map(|f| (f.sentence_index, f.strength)).collect();
    indexed.sort_by_key(|&(i, _)| i);
    for pair in indexed.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(ScoreError::DuplicateIndex(pair[0].0));
        }
    }
    if let Some(&(index, _)) = indexed.last() {
        if index >= total_sentences {
            return Err(ScoreError::IndexOutOfRange { index, total: total_sentences });
        }
    }

    let biased_count = indexed.len();
    let biased_ratio = biased_count as f64 / total_sentences as f64;
    let mean_strength = if biased_count == 0 {
        0.0
    } else {
        indexed.iter().map(|&(_, s)| s).sum::<f64>() / biased_count as f64
    };
    Ok(ArticleScore {
        biased_ratio,
        mean_strength,
        score: (biased_ratio + mean_strength) / 2.0,
        biased_count,
        total_sentences,
    })
}
