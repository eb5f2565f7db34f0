//! Mapping model findings back onto segmented sentences.

use std::collections::{BTreeMap, HashSet};

use super::parse::{RawFinding, RepairKind, RepairNote, SentenceRef};
use super::{AlignmentMethod, SentenceFinding};
use crate::segmentation::Sentence;
use crate::taxonomy::bias_type_from_name;

/// Minimum token-trigram Jaccard similarity for a fuzzy text match.
pub const FUZZY_THRESHOLD: f64 = 0.6;

/// Lowercase, collapse whitespace, strip punctuation at both ends.
pub fn normalize_text(s: &str) -> String {
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    collapsed
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string()
}

fn trigrams(normalized: &str) -> HashSet<Vec<&str>> {
    let tokens: Vec<&str> = normalized.split(' ').filter(|t| !t.is_empty()).collect();
    if tokens.len() < 3 {
        return std::iter::once(tokens).filter(|t| !t.is_empty()).collect();
    }
    tokens.windows(3).map(<[&str]>::to_vec).collect()
}

pub fn trigram_jaccard(a: &str, b: &str) -> f64 {
    let (a, b) = (normalize_text(a), normalize_text(b));
    let (ga, gb) = (trigrams(&a), trigrams(&b));
    let union = ga.union(&gb).count();
    if union == 0 {
        return 0.0;
    }
    ga.intersection(&gb).count() as f64 / union as f64
}

fn locate(r: &SentenceRef, sentences: &[Sentence]) -> Option<(usize, AlignmentMethod)> {
    match r {
        SentenceRef::Index(i) => sentences
            .iter()
            .any(|s| s.index == *i)
            .then_some((*i, AlignmentMethod::Index)),
        SentenceRef::Text(text) => {
            let wanted = normalize_text(text);
            if let Some(s) = sentences.iter().find(|s| normalize_text(&s.text) == wanted) {
                return Some((s.index, AlignmentMethod::ExactText));
            }
            let mut best: Option<(usize, f64)> = None;
            for s in sentences {
                let sim = trigram_jaccard(text, &s.text);
                if sim >= FUZZY_THRESHOLD && best.is_none_or(|(_, b)| sim > b) {
                    best = Some((s.index, sim));
                }
            }
            best.map(|(i, _)| (i, AlignmentMethod::Fuzzy))
        }
    }
}

/// Attach findings to sentences. Unlocatable findings are dropped with a
/// note; when several findings hit one sentence the strongest wins, ties
/// going to the type listed earlier in the taxonomy.
pub fn align_findings(
    findings: &[RawFinding],
    sentences: &[Sentence],
) -> (Vec<SentenceFinding>, Vec<RepairNote>) {
    let mut notes = Vec::new();
    let mut by_index: BTreeMap<usize, SentenceFinding> = BTreeMap::new();

    for raw in findings {
        let Ok(bias_type) = bias_type_from_name(&raw.bias_type_name) else {
            notes.push(RepairNote::new(
                RepairKind::UnknownBiasType,
                format!("unknown type {:?}", raw.bias_type_name),
            ));
            continue;
        };
        let Some((sentence_index, alignment_method)) = locate(&raw.sentence_ref, sentences) else {
            notes.push(RepairNote::new(
                RepairKind::SentenceNotFound,
                format!("no sentence matches reference {:?}", raw.sentence_ref),
            ));
            continue;
        };
        let candidate = SentenceFinding {
            sentence_index,
            bias_type,
            strength: raw.strength_raw.clamp(0.0, 1.0),
            explanation: raw.explanation.clone(),
            alignment_method,
        };
        match by_index.get_mut(&sentence_index) {
            None => {
                by_index.insert(sentence_index, candidate);
            }
            Some(kept) => {
                notes.push(RepairNote::new(
                    RepairKind::DuplicateFinding,
                    format!("several findings for sentence {sentence_index}; kept the strongest"),
                ));
                let wins = candidate.strength > kept.strength
                    || (candidate.strength == kept.strength
                        && candidate.bias_type.ordinal() < kept.bias_type.ordinal());
                if wins {
                    *kept = candidate;
                }
            }
        }
    }
    (by_index.into_values().collect(), notes)
}
