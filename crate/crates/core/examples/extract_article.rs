//! Extract title, byline and body from an HTML page.
//!
//! `cargo run --example extract_article [page.html]`

use biasscan::extract_article;

const PAGE: &str = r#"<html lang="en"><head><title>Port strike ends</title></head><body>
<nav><a href="/">Home</a> <a href="/world">World</a></nav>
<article>
  <span class="byline">By A. Reporter</span>
  <p>Dock workers returned to work on Monday after a nine-day strike over shift patterns and pay.</p>
  <p>The agreement raises wages by three percent this year and limits night shifts to four per week.</p>
</article>
<footer>Contact us | Privacy | Terms</footer>
</body></html>"#;

fn main() {
    let html = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => PAGE.to_string(),
    };
    match extract_article(&html, None) {
        Ok(article) => {
            println!("title:    {}", article.title);
            println!("byline:   {}", article.byline);
            println!("language: {}", article.language_hint.as_deref().unwrap_or("-"));
            println!("---");
            println!("{}", article.body_text);
        }
        Err(e) => eprintln!("extraction failed: {e}"),
    }
}
