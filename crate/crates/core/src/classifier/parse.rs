//! Recovery of findings from raw model text.
//!
//! Models wrap JSON in fences, add chatter, leave trailing commas and drift
//! off the requested strength scale. The pipeline below recovers what it
//! can and records every intervention as a [`RepairNote`].

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::taxonomy::bias_type_from_name;

/// How a finding refers to its sentence: by the number from the prompt, or
/// by quoting the sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SentenceRef {
    Index(usize),
    Text(String),
}

/// A finding as reported by the model, before alignment to sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawFinding {
    pub sentence_ref: SentenceRef,
    pub bias_type_name: String,
    /// Already clamped into `[0, 1]`.
    pub strength_raw: f64,
    pub explanation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum RepairKind {
    FenceStripped,
    SurroundingTextTrimmed,
    TrailingCommaRemoved,
    KeysRequoted,
    EntryNotObject,
    MissingField,
    InvalidStrength,
    StrengthRescaled,
    StrengthClamped,
    UnknownBiasType,
    SentenceNotFound,
    DuplicateFinding,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct RepairNote {
    pub kind: RepairKind,
    pub detail: String,
}

impl RepairNote {
    pub fn new(kind: RepairKind, detail: impl Into<String>) -> Self {
        RepairNote { kind, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no JSON object could be recovered from the model response: {reason}")]
pub struct Unparseable {
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedResponse {
    pub findings: Vec<RawFinding>,
    pub notes: Vec<RepairNote>,
}

pub fn parse_model_response(raw: &str) -> Result<ParsedResponse, Unparseable> {
    let mut notes = Vec::new();

    let (unfenced, mut outside) = match strip_fences(raw) {
        Some((inner, outside)) => {
            notes.push(RepairNote::new(RepairKind::FenceStripped, "removed markdown code fence"));
            (inner, outside)
        }
        None => (raw, 0),
    };

    let (Some(open), Some(close)) = (unfenced.find('{'), unfenced.rfind('}')) else {
        return Err(Unparseable { reason: "no braces found".into() });
    };
    if close < open {
        return Err(Unparseable { reason: "no '{' before the last '}'".into() });
    }
    let candidate = &unfenced[open..=close];
    outside += unfenced[..open].trim().chars().count();
    outside += unfenced[close + 1..].trim().chars().count();
    if outside > 0 {
        notes.push(RepairNote::new(
            RepairKind::SurroundingTextTrimmed,
            format!("dropped {outside} chars of surrounding text"),
        ));
    }

    let object = match serde_json::from_str::<Value>(candidate) {
        Ok(v) => v,
        Err(first) => {
            let (fixed, fix_notes) = tolerant_fixes(candidate);
            if fix_notes.is_empty() {
                return Err(Unparseable { reason: first.to_string() });
            }
            let v = serde_json::from_str::<Value>(&fixed)
                .map_err(|e| Unparseable { reason: e.to_string() })?;
            notes.extend(fix_notes);
            v
        }
    };
    let Value::Object(entries) = object else {
        return Err(Unparseable { reason: "top-level value is not an object".into() });
    };

    let mut findings = Vec::new();
    for (key, value) in entries {
        if let Some(f) = coerce_entry(&key, value, &mut notes) {
            findings.push(f);
        }
    }
    Ok(ParsedResponse { findings, notes })
}

/// Content of the first fenced block (or everything after an unclosed
/// fence), plus the number of non-blank chars found outside the fences.
fn strip_fences(raw: &str) -> Option<(&str, usize)> {
    let fence = raw.find("```")?;
    let mut outside = raw[..fence].trim().chars().count();
    let rest = &raw[fence + 3..];
    // Skip an info string such as `json` up to the end of the fence line.
    let body = match rest.find('\n') {
        Some(nl) if !rest[..nl].contains('{') => &rest[nl + 1..],
        _ => rest.trim_start_matches(|c: char| c.is_ascii_alphabetic()),
    };
    let inner = match body.find("```") {
        Some(end) => {
            outside += body[end + 3..].trim().chars().count();
            &body[..end]
        }
        None => body,
    };
    Some((inner, outside))
}

/// Drop trailing commas and turn single-quoted object keys into JSON
/// strings. Works on the token level so string contents are left alone.
fn tolerant_fixes(src: &str) -> (String, Vec<RepairNote>) {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len());
    let mut commas = 0usize;
    let mut requoted = 0usize;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '"' => {
                let end = skip_string(&chars, i, '"');
                out.extend(&chars[i..end]);
                i = end;
                continue;
            }
            '\'' => {
                let end = skip_string(&chars, i, '\'');
                let closed = end > i + 1 && chars[end - 1] == '\'';
                let next = chars[end..].iter().find(|c| !c.is_whitespace());
                if closed && next == Some(&':') {
                    let inner: String = chars[i + 1..end - 1].iter().collect();
                    out.push_str(&serde_json::to_string(&inner.replace("\\'", "'")).unwrap_or_default());
                    requoted += 1;
                } else {
                    out.extend(&chars[i..end]);
                }
                i = end;
                continue;
            }
            ',' => {
                let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
                if matches!(next, Some('}') | Some(']')) {
                    commas += 1;
                    i += 1;
                    continue;
                }
            }
            _ => {}
        }
        out.push(c);
        i += 1;
    }
    let mut notes = Vec::new();
    if commas > 0 {
        notes.push(RepairNote::new(
            RepairKind::TrailingCommaRemoved,
            format!("removed {commas} trailing comma(s)"),
        ));
    }
    if requoted > 0 {
        notes.push(RepairNote::new(
            RepairKind::KeysRequoted,
            format!("converted {requoted} single-quoted key(s)"),
        ));
    }
    (out, notes)
}

/// Index one past the closing quote of the string starting at `start`, or
/// the end of input when the string never closes.
fn skip_string(chars: &[char], start: usize, quote: char) -> usize {
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    chars.len()
}

fn field<'a>(obj: &'a Map<String, Value>, names: &[&str]) -> Option<&'a Value> {
    names.iter().find_map(|n| obj.get(*n))
}

fn coerce_entry(key: &str, value: Value, notes: &mut Vec<RepairNote>) -> Option<RawFinding> {
    let Value::Object(obj) = value else {
        notes.push(RepairNote::new(RepairKind::EntryNotObject, format!("entry {key:?} is not an object")));
        return None;
    };

    let bias_type_name = match field(&obj, &["bias_type", "type", "bias"]) {
        Some(Value::String(s)) if !s.trim().is_empty() => s.trim().to_string(),
        _ => {
            notes.push(RepairNote::new(RepairKind::MissingField, format!("entry {key:?} has no bias_type")));
            return None;
        }
    };
    let explanation = match field(&obj, &["explanation", "reason"]) {
        Some(Value::String(s)) if !s.trim().is_empty() => s.trim().to_string(),
        _ => {
            notes.push(RepairNote::new(RepairKind::MissingField, format!("entry {key:?} has no explanation")));
            return None;
        }
    };
    let strength = match field(&obj, &["strength", "score"]) {
        Some(Value::Number(n)) => n.as_f64(),
        Some(Value::String(s)) => s.trim().parse::<f64>().ok(),
        None => {
            notes.push(RepairNote::new(RepairKind::MissingField, format!("entry {key:?} has no strength")));
            return None;
        }
        _ => None,
    };
    let Some(strength) = strength.filter(|s| s.is_finite()) else {
        notes.push(RepairNote::new(RepairKind::InvalidStrength, format!("entry {key:?} has a non-numeric strength")));
        return None;
    };
    let strength = normalize_strength(strength, key, notes);

    if bias_type_from_name(&bias_type_name).is_err() {
        notes.push(RepairNote::new(
            RepairKind::UnknownBiasType,
            format!("entry {key:?} names unknown type {bias_type_name:?}"),
        ));
        return None;
    }

    let trimmed = key.trim();
    let sentence_ref = match trimmed.parse::<usize>() {
        Ok(i) => SentenceRef::Index(i),
        Err(_) => SentenceRef::Text(trimmed.to_string()),
    };
    Some(RawFinding { sentence_ref, bias_type_name, strength_raw: strength, explanation })
}

/// Map a reported strength into `[0, 1]`; values in `(1, 10]` are read as
/// a 0–10 scale.
fn normalize_strength(s: f64, key: &str, notes: &mut Vec<RepairNote>) -> f64 {
    if (0.0..=1.0).contains(&s) {
        s
    } else if s > 1.0 && s <= 10.0 {
        notes.push(RepairNote::new(RepairKind::StrengthRescaled, format!("entry {key:?}: {s} read on a 0-10 scale")));
        s / 10.0
    } else {
        let clamped = s.clamp(0.0, 1.0);
        notes.push(RepairNote::new(RepairKind::StrengthClamped, format!("entry {key:?}: {s} clamped to {clamped}")));
        clamped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(p: &ParsedResponse) -> Vec<RepairKind> {
        p.notes.iter().map(|n| n.kind).collect()
    }

    #[test]
    fn fenced_response() {
        let raw = "```json\n{\"2\": {\"bias_type\": \"word_choice_bias\", \"strength\": 0.8, \"explanation\": \"loaded verb\"}}\n```";
        let p = parse_model_response(raw).unwrap();
        assert_eq!(
            p.findings,
            vec![RawFinding {
                sentence_ref: SentenceRef::Index(2),
                bias_type_name: "word_choice_bias".into(),
                strength_raw: 0.8,
                explanation: "loaded verb".into(),
            }]
        );
        assert_eq!(kinds(&p), [RepairKind::FenceStripped]);
    }

    #[test]
    fn empty_object() {
        assert_eq!(parse_model_response("{}").unwrap(), ParsedResponse::default());
    }

    #[test]
    fn unknown_type_dropped() {
        let p = parse_model_response(r#"{"1": {"bias_type": "quantum_bias", "strength": 0.5, "explanation": "x"}}"#).unwrap();
        assert!(p.findings.is_empty());
        assert_eq!(kinds(&p), [RepairKind::UnknownBiasType]);
    }

    #[test]
    fn trailing_commas_and_single_quoted_keys() {
        let p = parse_model_response("{'4': {'bias_type': \"opinionated\", 'strength': 0.3, 'explanation': \"it's opinion\",},}").unwrap();
        assert_eq!(p.findings.len(), 1);
        assert_eq!(kinds(&p), [RepairKind::TrailingCommaRemoved, RepairKind::KeysRequoted]);
    }

    #[test]
    fn strength_scales() {
        let p = parse_model_response(
            r#"{"0": {"bias_type": "political", "strength": 7, "explanation": "a"},
                "1": {"bias_type": "political", "strength": -2, "explanation": "b"},
                "2": {"bias_type": "political", "strength": "0.25", "explanation": "c"},
                "3": {"bias_type": "political", "strength": 40, "explanation": "d"}}"#,
        )
        .unwrap();
        let s: Vec<f64> = p.findings.iter().map(|f| f.strength_raw).collect();
        assert_eq!(s, [0.7, 0.0, 0.25, 1.0]);
        assert_eq!(
            kinds(&p),
            [RepairKind::StrengthRescaled, RepairKind::StrengthClamped, RepairKind::StrengthClamped]
        );
    }

    #[test]
    fn text_refs_and_missing_fields() {
        let p = parse_model_response(
            r#"{"The plan is a disaster.": {"bias_type": "opinionated", "strength": 0.5, "explanation": "e"},
                "1": {"strength": 0.5, "explanation": "no type"},
                "2": "not an object"}"#,
        )
        .unwrap();
        assert_eq!(p.findings[0].sentence_ref, SentenceRef::Text("The plan is a disaster.".into()));
        assert_eq!(kinds(&p), [RepairKind::MissingField, RepairKind::EntryNotObject]);
    }

    #[test]
    fn hopeless_inputs() {
        assert!(parse_model_response("garbage").is_err());
        assert!(parse_model_response("} {").is_err());
        assert!(parse_model_response("[1, 2]").is_err());
        assert!(parse_model_response("{\"a\": ").is_err());
        assert!(parse_model_response("```").is_err());
    }
}
