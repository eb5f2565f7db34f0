//! Rule-based sentence segmentation with exact character offsets.
//!
//! Offsets count Unicode scalar values (Rust `char`s), not bytes, so that
//! `body_text.chars().skip(start).take(end - start)` is the sentence text.

use std::collections::HashSet;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

/// One sentence of an article body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    /// Inclusive char offset into the body text.
    pub start: usize,
    /// Exclusive char offset into the body text.
    pub end: usize,
    /// The sentence contains a quotation mark, i.e. possibly a quoted
    /// statement that is not the outlet's own voice.
    #[serde(default)]
    pub contains_quotation: bool,
}

/// Sentence splitter configured with an abbreviation list.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: HashSet<String>,
}

static DEFAULT: LazyLock<Segmenter> =
    LazyLock::new(|| Segmenter::from_list(DEFAULT_ABBREVIATIONS));

impl Default for Segmenter {
    fn default() -> Self {
        DEFAULT.clone()
    }
}

impl Segmenter {
    /// Parse an abbreviation list: one lowercase token per line, `#` starts
    /// a comment line.
    pub fn from_list(list: &str) -> Self {
        let abbreviations = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Segmenter { abbreviations }
    }

    pub fn with_abbreviations<I, S>(mut self, extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.abbreviations
            .extend(extra.into_iter().map(|s| s.as_ref().trim().to_lowercase()));
        self
    }

    pub fn segment(&self, body_text: &str) -> Vec<Sentence> {
        let chars: Vec<(usize, char)> = body_text.char_indices().collect();
        let mut out = Vec::new();
        let mut state = Scan::default();
        let mut i = 0;

        while i < chars.len() {
            let c = chars[i].1;
            if c == '\n' || c == '\r' {
                emit(body_text, &chars, &mut state, i, &mut out);
                state = Scan::default();
                i += 1;
                continue;
            }
            if state.start.is_none() {
                if c.is_whitespace() {
                    i += 1;
                    continue;
                }
                state.start = Some(i);
                state.line_start = state.line_start.or(Some(i));
            }

            if !is_terminal(c) {
                state.track(c);
                i += 1;
                continue;
            }

            let mut j = i;
            while j < chars.len() && is_terminal(chars[j].1) {
                j += 1;
            }
            let single_period = j == i + 1 && c == '.';
            while j < chars.len() && is_closer(chars[j].1) {
                state.close(chars[j].1);
                j += 1;
            }

            if state.balanced()
                && self.boundary_follows(&chars, j)
                && !(single_period && self.protected_period(&chars, &state, i))
            {
                emit(body_text, &chars, &mut state, j, &mut out);
            }
            i = j;
        }
        emit(body_text, &chars, &mut state, chars.len(), &mut out);
        out
    }

    /// After a terminal cluster ending at `j`: end of text, or whitespace
    /// followed by a plausible sentence start. Line breaks are handled by
    /// the caller.
    fn boundary_follows(&self, chars: &[(usize, char)], j: usize) -> bool {
        if j >= chars.len() {
            return true;
        }
        if !chars[j].1.is_whitespace() {
            return false;
        }
        match chars[j..].iter().map(|&(_, c)| c).find(|c| !c.is_whitespace()) {
            None => true,
            Some(next) => next.is_uppercase() || next.is_ascii_digit() || is_opener(next),
        }
    }

    /// Whether the period at `dot` belongs to an abbreviation, an initial,
    /// or a list number at the start of a line.
    fn protected_period(&self, chars: &[(usize, char)], state: &Scan, dot: usize) -> bool {
        let mut tok_start = dot;
        while tok_start > 0 && !chars[tok_start - 1].1.is_whitespace() {
            tok_start -= 1;
        }
        while tok_start < dot && is_opener(chars[tok_start].1) {
            tok_start += 1;
        }
        let token: String = chars[tok_start..=dot]
            .iter()
            .flat_map(|&(_, c)| c.to_lowercase())
            .collect();
        if self.abbreviations.contains(&token) {
            return true;
        }
        let stem = &token[..token.len() - 1];
        let mut stem_chars = stem.chars();
        if let (Some(only), None) = (stem_chars.next(), stem_chars.next()) {
            if only.is_alphabetic() {
                return true;
            }
        }
        !stem.is_empty()
            && stem.chars().all(|c| c.is_ascii_digit())
            && state.line_start == Some(tok_start)
    }
}

#[derive(Debug, Default)]
struct Scan {
    start: Option<usize>,
    line_start: Option<usize>,
    in_straight_quote: bool,
    curly_depth: u32,
    bracket_depth: u32,
}

impl Scan {
    fn track(&mut self, c: char) {
        match c {
            '"' => self.in_straight_quote = !self.in_straight_quote,
            '“' | '«' => self.curly_depth += 1,
            '”' | '»' => self.curly_depth = self.curly_depth.saturating_sub(1),
            '(' | '[' | '{' => self.bracket_depth += 1,
            ')' | ']' | '}' => self.bracket_depth = self.bracket_depth.saturating_sub(1),
            _ => {}
        }
    }

    /// Closing punctuation right after a terminal only ever closes.
    fn close(&mut self, c: char) {
        match c {
            '"' => self.in_straight_quote = false,
            '”' | '»' | ')' | ']' => self.track(c),
            _ => {}
        }
    }

    fn balanced(&self) -> bool {
        !self.in_straight_quote && self.curly_depth == 0 && self.bracket_depth == 0
    }
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | ')' | ']' | '»')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '“' | '‘' | '(' | '[' | '«')
}

fn is_quotation_mark(c: char) -> bool {
    matches!(c, '"' | '“' | '”' | '«' | '»' | '„')
}

/// Close the open sentence at char position `upto` (exclusive), trimming
/// trailing whitespace.
fn emit(
    body: &str,
    chars: &[(usize, char)],
    state: &mut Scan,
    upto: usize,
    out: &mut Vec<Sentence>,
) {
    let Some(start) = state.start.take() else {
        return;
    };
    let mut end = upto;
    while end > start && chars[end - 1].1.is_whitespace() {
        end -= 1;
    }
    if end == start {
        return;
    }
    let byte_start = chars[start].0;
    let byte_end = chars.get(end).map_or(body.len(), |&(b, _)| b);
    let text = &body[byte_start..byte_end];
    out.push(Sentence {
        index: out.len(),
        text: text.to_string(),
        start,
        end,
        contains_quotation: text.chars().any(is_quotation_mark),
    });
}

/// Split `body_text` into sentences with the default English abbreviation list.
pub fn segment(body_text: &str) -> Vec<Sentence> {
    DEFAULT.segment(body_text)
}
