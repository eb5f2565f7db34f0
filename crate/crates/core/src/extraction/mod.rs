//! Main-content extraction from article HTML.
//!
//! A compact take on the readability approach: paragraphs vote for their
//! parent and grandparent containers, containers are weighted by tag,
//! class/id keywords and link density, and the winning container plus
//! qualifying siblings is serialized as plain text, one paragraph per line.

mod dom;
mod fetch;

use std::collections::{HashMap, HashSet};

use ego_tree::NodeId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use dom::{text_of, Element, Html, Node};
pub use fetch::{decode_html, fetch_url, FetchError, FetchLimits, Fetcher, FETCH_USER_AGENT};

/// Minimum extracted text, in chars, for a successful extraction.
pub const MIN_CONTENT_CHARS: usize = 140;

/// Paragraphs shorter than this do not vote for their containers.
const MIN_SCORING_PARAGRAPH: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize, schemars::JsonSchema)]
pub struct Article {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub byline: String,
    /// Plain text, one paragraph per line.
    pub body_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<String>,
}

impl Article {
    /// Wrap plain text as an article: line endings normalized, blank lines
    /// dropped, each line trimmed.
    pub fn from_text(text: &str) -> Article {
        let body_text = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect::<Vec<_>>()
            .join("\n");
        Article { body_text, ..Article::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("no article content found")]
    NoContentFound,
    #[error("input is not HTML: {0}")]
    MalformedInput(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractOptions {
    pub min_content_chars: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { min_content_chars: MIN_CONTENT_CHARS }
    }
}

const SKIP_TAGS: &[&str] = &[
    "head", "script", "style", "noscript", "template", "nav", "footer", "aside", "form", "iframe",
    "svg", "button", "select", "textarea", "input", "header", "menu", "dialog", "object", "embed",
    "canvas", "figure", "video", "audio", "picture",
];

const BLOCK_TAGS: &[&str] = &[
    "p", "div", "article", "section", "main", "ul", "ol", "li", "table", "tr", "td", "th",
    "blockquote", "pre", "h1", "h2", "h3", "h4", "h5", "h6", "dl", "dd", "dt", "hr", "address",
    "header", "footer", "nav", "aside", "form", "figure",
];

const CONTAINER_TAGS: &[&str] = &["div", "section", "article", "main", "li", "td", "blockquote", "dd", "span"];

const POSITIVE: &[&str] = &[
    "article", "body", "content", "entry", "main", "page", "post", "text", "blog", "story",
];

const NEGATIVE: &[&str] = &[
    "nav", "navbar", "navigation", "menu", "footer", "sidebar", "comment", "comments", "ad", "ads",
    "advert", "advertisement", "sponsor", "sponsored", "promo", "banner", "share", "social",
    "related", "widget", "cookie", "popup", "modal", "breadcrumb", "breadcrumbs", "subscribe",
    "newsletter", "masthead", "skip", "author", "byline", "dateline",
];

fn class_tokens(el: &Element) -> Vec<String> {
    el.attr("class")
        .into_iter()
        .chain(el.attr("id"))
        .flat_map(|s| s.split(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn class_signals(el: &Element) -> (bool, bool) {
    let tokens = class_tokens(el);
    let pos = tokens.iter().any(|t| POSITIVE.contains(&t.as_str()));
    let neg = tokens.iter().any(|t| NEGATIVE.contains(&t.as_str()));
    (pos, neg)
}

fn class_weight(el: &Element) -> f64 {
    let (pos, neg) = class_signals(el);
    (if pos { 25.0 } else { 0.0 }) - (if neg { 25.0 } else { 0.0 })
}

fn is_skipped(v: &Element) -> bool {
    let name = v.name();
    if SKIP_TAGS.contains(&name) {
        return true;
    }
    if v.attr("hidden").is_some() || v.attr("aria-hidden") == Some("true") {
        return true;
    }
    if let Some(style) = v.attr("style") {
        let style: String = style.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        if style.contains("display:none") || style.contains("visibility:hidden") {
            return true;
        }
    }
    if matches!(name, "html" | "body" | "article" | "main") {
        return false;
    }
    let (pos, neg) = class_signals(v);
    neg && !pos
}

fn tag_base_score(name: &str) -> f64 {
    match name {
        "div" => 5.0,
        "pre" | "td" | "blockquote" => 3.0,
        "address" | "ol" | "ul" | "dl" | "dd" | "dt" | "li" | "form" => -3.0,
        "h1" | "h2" | "h3" | "h4" | "h5" | "h6" | "th" => -5.0,
        _ => 0.0,
    }
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug)]
struct Paragraph {
    node: NodeId,
    text: String,
    link_chars: usize,
}

impl Paragraph {
    fn chars(&self) -> usize {
        self.text.chars().count()
    }

    fn link_density(&self) -> f64 {
        let total = self.chars();
        if total == 0 {
            0.0
        } else {
            self.link_chars as f64 / total as f64
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct TextStats {
    chars: usize,
    link_chars: usize,
}

impl TextStats {
    fn link_density(self) -> f64 {
        if self.chars == 0 {
            0.0
        } else {
            self.link_chars as f64 / self.chars as f64
        }
    }
}

/// Single pass over the DOM collecting paragraphs and per-element text
/// statistics, ignoring boilerplate subtrees. Iterative, so deeply nested
/// markup cannot exhaust the stack.
struct Scan {
    paragraphs: Vec<Paragraph>,
    stats: HashMap<NodeId, TextStats>,
}

fn has_block_descendants(doc: &Html) -> HashSet<NodeId> {
    use ego_tree::iter::Edge;
    let mut with_blocks = HashSet::new();
    for edge in doc.tree.root().traverse() {
        if let Edge::Close(node) = edge {
            let contributes = with_blocks.contains(&node.id())
                || node.value().as_element().is_some_and(|e| BLOCK_TAGS.contains(&e.name()));
            if contributes {
                if let Some(parent) = node.parent() {
                    with_blocks.insert(parent.id());
                }
            }
        }
    }
    with_blocks
}

fn is_paragraph_like(el: &Element, id: NodeId, with_blocks: &HashSet<NodeId>) -> bool {
    let name = el.name();
    matches!(name, "p" | "pre" | "h2" | "h3" | "h4" | "h5" | "h6")
        || (CONTAINER_TAGS.contains(&name) && !with_blocks.contains(&id))
}

fn scan(doc: &Html) -> Scan {
    use ego_tree::iter::Edge;

    let with_blocks = has_block_descendants(doc);
    let mut paragraphs = Vec::new();
    let mut stats: HashMap<NodeId, TextStats> = HashMap::new();
    let mut open: Vec<(NodeId, TextStats)> = Vec::new();
    let mut skipping: Option<NodeId> = None;
    let mut anchor_depth = 0usize;
    let mut para: Option<(NodeId, String, usize)> = None;

    for edge in doc.tree.root().traverse() {
        match edge {
            Edge::Open(node) => {
                if skipping.is_some() {
                    continue;
                }
                match node.value() {
                    Node::Element(el) => {
                        if is_skipped(el) {
                            skipping = Some(node.id());
                            continue;
                        }
                        let name = el.name();
                        if name == "a" {
                            anchor_depth += 1;
                        }
                        if name == "br" {
                            if let Some((_, text, _)) = para.as_mut() {
                                text.push(' ');
                            }
                        }
                        if para.is_none() && is_paragraph_like(el, node.id(), &with_blocks) {
                            para = Some((node.id(), String::new(), 0));
                        }
                        open.push((node.id(), TextStats::default()));
                    }
                    Node::Text(t) => {
                        let n = collapse_ws(t).chars().count();
                        if let Some((_, s)) = open.last_mut() {
                            s.chars += n;
                            if anchor_depth > 0 {
                                s.link_chars += n;
                            }
                        }
                        if let Some((_, text, links)) = para.as_mut() {
                            text.push_str(t);
                            if anchor_depth > 0 {
                                *links += n;
                            }
                        }
                    }
                    _ => {}
                }
            }
            Edge::Close(node) => {
                if let Some(skip) = skipping {
                    if skip == node.id() {
                        skipping = None;
                    }
                    continue;
                }
                let Some(el) = node.value().as_element() else {
                    continue;
                };
                if el.name() == "a" {
                    anchor_depth = anchor_depth.saturating_sub(1);
                }
                if let Some((id, s)) = open.pop() {
                    stats.insert(id, s);
                    if let Some((_, parent)) = open.last_mut() {
                        parent.chars += s.chars;
                        parent.link_chars += s.link_chars;
                    }
                }
                if para.as_ref().is_some_and(|(id, _, _)| *id == node.id()) {
                    let (id, raw, link_chars) = para.take().expect("open paragraph");
                    let text = collapse_ws(&raw);
                    if !text.is_empty() {
                        paragraphs.push(Paragraph { node: id, text, link_chars });
                    }
                }
            }
        }
    }
    Scan { paragraphs, stats }
}

fn first_text(doc: &Html, tag: &str) -> Option<String> {
    doc.elements()
        .filter(|(_, e)| e.name() == tag)
        .map(|(n, _)| collapse_ws(&text_of(n)))
        .find(|t| !t.is_empty())
}

fn find_byline(doc: &Html) -> String {
    for (node, v) in doc.elements() {
        let is_author = v.attr("rel").is_some_and(|r| r.eq_ignore_ascii_case("author"))
            || v.attr("itemprop").is_some_and(|r| r.eq_ignore_ascii_case("author"))
            || class_tokens(v).iter().any(|t| t.contains("author") || t.contains("byline"));
        if !is_author || matches!(v.name(), "script" | "style" | "meta" | "link") {
            continue;
        }
        let text = collapse_ws(&text_of(node));
        if !text.is_empty() && text.chars().count() <= 100 {
            return text;
        }
    }
    String::new()
}

fn looks_like_markup(html: &str) -> bool {
    let bytes = html.as_bytes();
    bytes.windows(2).any(|w| w[0] == b'<' && (w[1].is_ascii_alphabetic() || matches!(w[1], b'!' | b'/' | b'?')))
}

pub fn extract_article(html: &str, base_url: Option<&str>) -> Result<Article, ExtractError> {
    extract_article_with(html, base_url, &ExtractOptions::default())
}

pub fn extract_article_with(
    html: &str,
    base_url: Option<&str>,
    options: &ExtractOptions,
) -> Result<Article, ExtractError> {
    if html.trim().is_empty() {
        return Err(ExtractError::MalformedInput("empty document"));
    }
    if !looks_like_markup(html) {
        return Err(ExtractError::MalformedInput("no markup tags"));
    }
    let doc = Html::parse_document(html);
    let Scan { paragraphs, stats } = scan(&doc);

    let mut body_text = select_content(&doc, &paragraphs, &stats);
    if body_text.chars().count() < options.min_content_chars {
        // Fall back to every paragraph outside boilerplate.
        body_text = join(paragraphs.iter().filter(|p| p.link_density() <= 0.5));
    }
    if body_text.chars().count() < options.min_content_chars {
        return Err(ExtractError::NoContentFound);
    }

    let title = first_text(&doc, "title").or_else(|| first_text(&doc, "h1")).unwrap_or_default();
    let language_hint = doc
        .root_element()
        .value()
        .as_element()
        .and_then(|e| e.attr("lang"))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string);

    Ok(Article {
        title,
        byline: find_byline(&doc),
        body_text,
        source_url: base_url.map(str::to_string),
        language_hint,
    })
}

fn join<'a>(paragraphs: impl Iterator<Item = &'a Paragraph>) -> String {
    paragraphs.map(|p| p.text.as_str()).collect::<Vec<_>>().join("\n")
}

fn select_content(doc: &Html, paragraphs: &[Paragraph], stats: &HashMap<NodeId, TextStats>) -> String {
    let mut scores: HashMap<NodeId, f64> = HashMap::new();
    let mut order: Vec<NodeId> = Vec::new();

    for p in paragraphs {
        let len = p.chars();
        if len < MIN_SCORING_PARAGRAPH {
            continue;
        }
        let commas = p.text.matches([',', '，']).count();
        let content = 1.0 + commas as f64 + (len / 100).min(3) as f64;
        let Some(node) = doc.tree.get(p.node) else { continue };
        let ancestors = node.ancestors().filter_map(|a| a.value().as_element().map(|e| (a.id(), e))).take(2);
        for (level, (id, anc)) in ancestors.enumerate() {
            let entry = scores.entry(id).or_insert_with(|| {
                order.push(id);
                tag_base_score(anc.name()) + class_weight(anc)
            });
            *entry += if level == 0 { content } else { content / 2.0 };
        }
    }

    let final_score = |id: NodeId| {
        let density = stats.get(&id).copied().unwrap_or_default().link_density();
        scores.get(&id).copied().unwrap_or(0.0) * (1.0 - density)
    };

    let mut top: Option<(NodeId, f64)> = None;
    for &id in &order {
        let s = final_score(id);
        if top.is_none_or(|(_, best)| s > best) {
            top = Some((id, s));
        }
    }
    let Some((top_id, top_score)) = top else {
        return String::new();
    };

    let mut included: HashSet<NodeId> = HashSet::from([top_id]);
    let threshold = (top_score * 0.2).max(10.0);
    let top_node = doc.tree.get(top_id).expect("candidate in tree");
    if let Some(parent) = top_node.parent() {
        for sib in parent.children() {
            let Some(el) = sib.value().as_element() else { continue };
            if sib.id() == top_id || is_skipped(el) {
                continue;
            }
            let st = stats.get(&sib.id()).copied().unwrap_or_default();
            let keep = final_score(sib.id()) >= threshold
                || (el.name() == "p"
                    && ((st.chars > 80 && st.link_density() < 0.25)
                        || (st.chars > 0 && st.link_chars == 0 && text_of(sib).trim_end().ends_with('.'))));
            if keep {
                included.insert(sib.id());
            }
        }
    }

    let within = |p: &&Paragraph| {
        doc.tree
            .get(p.node)
            .is_some_and(|n| included.contains(&n.id()) || n.ancestors().any(|a| included.contains(&a.id())))
    };
    join(paragraphs.iter().filter(within).filter(|p| p.link_density() <= 0.5))
}
