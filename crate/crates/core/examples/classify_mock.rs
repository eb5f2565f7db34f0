//! Classify an article with the offline lexicon backend.

use biasscan::{classify, Article, ClassifyConfig, MockBackend};

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let article = Article::from_text(
        "The council met on Tuesday. Critics say the shocking plan is disastrous. \
         The mayor's regime slammed the protesters. The vote was postponed.",
    );
    let backend = MockBackend::with_default_lexicon();
    let (sentences, result) = classify(&article, &backend, &ClassifyConfig::default()).await.expect("mock never fails");
    for f in &result.findings {
        println!(
            "{} | {} | {:.1} | {}",
            sentences[f.sentence_index].text,
            f.bias_type.canonical_name(),
            f.strength,
            f.explanation
        );
    }
    println!("{} chunk(s), model {}", result.diagnostics.chunks.len(), result.diagnostics.model_id);
}
