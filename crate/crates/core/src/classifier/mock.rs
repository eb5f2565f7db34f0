//! Deterministic lexicon-driven backend for offline runs and tests.

use std::collections::BTreeMap;

use async_trait::async_trait;
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::backend::{BackendError, CallLimits, ModelBackend};
use super::prompt::PromptBundle;
use crate::taxonomy::{bias_type_from_name, BiasType, UnknownBiasType};

pub const MOCK_MODEL_ID: &str = "mock-lexicon/v1";

/// Maximum number of distinct trigger hits that raise the strength.
const HIT_CAP: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MockLexiconError {
    #[error("mock lexicon is empty")]
    Empty,
    #[error(transparent)]
    UnknownType(#[from] UnknownBiasType),
}

/// Flags every prompt sentence that contains a trigger term
/// (case-insensitive substring match) with the term's bias type.
#[derive(Debug, Clone)]
pub struct MockBackend {
    /// Sorted by taxonomy order; terms lowercased.
    lexicon: Vec<(BiasType, Vec<String>)>,
}

impl MockBackend {
    pub fn new<K, T>(lexicon: impl IntoIterator<Item = (K, Vec<T>)>) -> Result<Self, MockLexiconError>
    where
        K: AsRef<str>,
        T: AsRef<str>,
    {
        let mut merged: BTreeMap<BiasType, Vec<String>> = BTreeMap::new();
        for (slug, terms) in lexicon {
            let t = bias_type_from_name(slug.as_ref())?;
            let entry = merged.entry(t).or_default();
            for term in terms {
                let term = term.as_ref().trim().to_lowercase();
                if !term.is_empty() && !entry.contains(&term) {
                    entry.push(term);
                }
            }
        }
        merged.retain(|_, terms| !terms.is_empty());
        if merged.is_empty() {
            return Err(MockLexiconError::Empty);
        }
        Ok(MockBackend { lexicon: merged.into_iter().collect() })
    }

    /// A small built-in lexicon so the command-line tools work with zero
    /// configuration.
    pub fn with_default_lexicon() -> Self {
        Self::new(default_lexicon()).expect("built-in lexicon is valid")
    }

    /// Classify one sentence: the type with the most distinct hits wins,
    /// ties going to the earlier taxonomy entry.
    fn judge(&self, sentence: &str) -> Option<(BiasType, usize, &str)> {
        let lowered = sentence.to_lowercase();
        let mut best: Option<(BiasType, usize, &str)> = None;
        for (ty, terms) in &self.lexicon {
            let hits: Vec<&String> = terms.iter().filter(|t| lowered.contains(t.as_str())).collect();
            if let Some(first) = hits.first() {
                if best.is_none_or(|(_, n, _)| hits.len() > n) {
                    best = Some((*ty, hits.len(), first.as_str()));
                }
            }
        }
        best
    }

    /// The response document this backend produces for a user message.
    pub fn respond(&self, user_message: &str) -> String {
        let mut out = Map::new();
        for line in user_message.lines() {
            let Some((index, text)) = line.split_once(": ") else {
                continue;
            };
            let Some((ty, hits, term)) = self.judge(text) else {
                continue;
            };
            let strength = (5 + hits.min(HIT_CAP)) as f64 / 10.0;
            out.insert(
                index.trim().to_string(),
                json!({
                    "bias_type": ty.slug(),
                    "strength": strength,
                    "explanation": format!("matched '{term}'"),
                }),
            );
        }
        Value::Object(out).to_string()
    }
}

#[async_trait]
impl ModelBackend for MockBackend {
    fn model_id(&self) -> &str {
        MOCK_MODEL_ID
    }

    async fn complete(&self, prompt: &PromptBundle, _: &CallLimits) -> Result<String, BackendError> {
        Ok(self.respond(&prompt.user_message))
    }
}

pub fn default_lexicon() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("ad_hominem_bias", vec!["incompetent", "clueless", "liar"]),
        ("ambiguous_attribution_bias", vec!["critics say", "experts say", "some say", "sources claim"]),
        (
            "emotional_sensationalism_bias",
            vec!["disastrous", "shameful", "catastrophic", "shocking", "outrageous", "horrifying"],
        ),
        ("speculation_bias", vec!["could spell", "might well", "is likely to"]),
        ("unsubstantiated_claims_bias", vec!["everyone knows", "undeniably", "it is clear that"]),
        ("word_choice_bias", vec!["slammed", "regime", "thugs", "scheme"]),
    ]
}
