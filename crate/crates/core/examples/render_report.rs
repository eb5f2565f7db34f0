//! Analyze text end to end and print the report as text and JSON.

use biasscan::classifier::{ClassifyConfig, MockBackend};
use biasscan::report::analyze;
use biasscan::Article;

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let mut article = Article::from_text(
        "Opposition leaders slammed the regime on Monday. Turnout was 54 percent. \
         \"It is a shameful day,\" one organizer said.",
    );
    article.title = "Election night".into();
    let report = analyze(&article, &MockBackend::with_default_lexicon(), &ClassifyConfig::default(), false)
        .await
        .expect("mock analysis");
    print!("{}", report.render_text());
    println!();
    println!("{}", report.to_json());
}
