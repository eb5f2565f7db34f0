//! Sentence-level news bias detection.
//!
//! The pipeline: [`extraction`] pulls article text out of HTML, [`segmentation`]
//! splits it into sentences, [`classifier`] asks a model backend which sentences
//! are biased and how, [`scoring`] turns findings into an article score and
//! [`report`] packages everything. [`evaluation`] measures a classifier
//! against labeled sentences and [`service`] exposes the pipeline over HTTP.
//!
//! Runnable examples live in `examples/`, one per capability:
//!
//! | example | shows |
//! |---|---|
//! | `extract_article` | HTML to article text, title, byline |
//! | `segment_text` | sentence splitting with character offsets |
//! | `parse_repair` | repairing malformed model output |
//! | `classify_mock` | classification with the offline lexicon backend |
//! | `score_article` | the article score from findings |
//! | `render_report` | full report as JSON and text |
//! | `evaluate_table` | metrics table on a labeled dataset |
//! | `serve_mock` | the HTTP service on the mock backend |
//! | `upstream_backend` | an OpenAI-compatible model endpoint |

pub mod classifier;
pub mod cli;
pub mod evaluation;
pub mod extraction;
pub mod report;
pub mod scoring;
pub mod segmentation;
pub mod service;
pub mod taxonomy;

pub use classifier::{classify, ClassifyConfig, MockBackend, ModelBackend, SentenceFinding};
pub use extraction::{extract_article, Article};
pub use report::{build_report, BiasReport};
pub use scoring::article_score;
pub use segmentation::{segment, Sentence};
pub use taxonomy::BiasType;
