//! Prompt construction for the bias classifier.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segmentation::Sentence;
use crate::taxonomy::{all_types, definition_of};

/// Bumped whenever any prompt wording changes.
pub const PROMPT_VERSION: &str = "bias-prompt/v1";

/// The single output example shown to the model.
pub const OUTPUT_EXAMPLE: &str = r#"{"3": {"bias_type": "word_choice_bias", "strength": 0.6, "explanation": "The verb \"slammed\" casts the minister's reply as aggressive rather than describing what was said."}}"#;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_message: String,
    pub user_message: String,
    pub prompt_version: String,
    pub expected_schema_example: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("cannot build a prompt for zero sentences")]
    EmptyInput,
}

fn system_message(language_hint: Option<&str>) -> String {
    let mut s = String::with_capacity(8 * 1024);
    s.push_str(
        "You are a careful media analyst. You receive numbered sentences from a single news \
         article and decide, sentence by sentence, whether the sentence is biased.\n\n\
         A sentence is biased when its wording, framing or choice of information steers the \
         reader toward a particular view instead of reporting neutrally. Neutral reporting of \
         what someone said is not biased in itself.\n\n\
         Use only the following bias types. Refer to each type by its identifier, the part \
         before the colon.\n\n",
    );
    for &t in all_types() {
        let _ = writeln!(s, "- {} ({}): {}", t.slug(), t.canonical_name(), definition_of(t));
    }
    s.push_str(
        "\nRules:\n\
         1. Consider every numbered sentence on its own, using the rest of the article only as context.\n\
         2. Report only biased sentences. Leave neutral sentences out entirely.\n\
         3. For each biased sentence pick the single bias type that fits best.\n\
         4. \"strength\" is a number from 0 to 1, where 0.1 is barely noticeable and 1 is extreme.\n\
         5. \"explanation\" is one short sentence saying why the sentence is biased.\n\
         6. Return ONLY a JSON object and nothing else: no prose and no code fences. Each key is \
         the number of a biased sentence exactly as given in the input. Each value is an object \
         with the fields \"bias_type\", \"strength\" and \"explanation\".\n\
         7. If no sentence is biased, return {}.\n",
    );
    if let Some(lang) = language_hint.map(str::trim).filter(|l| !l.is_empty()) {
        let _ = writeln!(
            s,
            "8. The article language is \"{lang}\". Write explanations in that language but keep the bias type identifiers as listed."
        );
    }
    s.push_str("\nExample of the required output format:\n");
    s.push_str(OUTPUT_EXAMPLE);
    s.push('\n');
    s
}

/// Build the prompt for one chunk of sentences. Sentences are listed under
/// their own `index`, so chunk prompts carry article-global numbering.
pub fn build_prompt(
    sentences: &[Sentence],
    language_hint: Option<&str>,
) -> Result<PromptBundle, PromptError> {
    if sentences.is_empty() {
        return Err(PromptError::EmptyInput);
    }
    let mut user_message = String::new();
    for s in sentences {
        let one_line: String =
            s.text.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }).collect();
        let _ = writeln!(user_message, "{}: {}", s.index, one_line);
    }
    Ok(PromptBundle {
        system_message: system_message(language_hint),
        user_message,
        prompt_version: PROMPT_VERSION.to_string(),
        expected_schema_example: OUTPUT_EXAMPLE.to_string(),
    })
}
