use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use biasscan::classifier::{Credential, UpstreamBackend, UpstreamConfig};
use serde_json::json;
use tracing_subscriber::fmt::MakeWriter;

use super::service::{config, post_json, start, stub_upstream};

#[derive(Clone, Default)]
pub struct Capture(Arc<Mutex<Vec<u8>>>);

impl Capture {
    pub fn contents(&self) -> String {
        String::from_utf8_lossy(&self.0.lock().unwrap()).into_owned()
    }
}

impl Write for Capture {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

impl<'a> MakeWriter<'a> for Capture {
    type Writer = Capture;

    fn make_writer(&'a self) -> Capture {
        self.clone()
    }
}

/// Installs a process-wide subscriber recording every event at every level.
pub fn capture() -> &'static Capture {
    static CAPTURE: OnceLock<Capture> = OnceLock::new();
    CAPTURE.get_or_init(|| {
        let capture = Capture::default();
        let subscriber = tracing_subscriber::fmt()
            .with_max_level(tracing::Level::TRACE)
            .with_ansi(false)
            .with_writer(capture.clone())
            .finish();
        tracing::subscriber::set_global_default(subscriber).expect("no other global subscriber");
        capture
    })
}

const SECRET: &str = "sk-privacy-canary-7f3a";
const ARTICLE: &str = "The quartermaster Zebulon Okonkwo slammed the harbour regime. Critics say the shocking levy is disastrous.";
const STORY_PATH: &str = "/stories/canary-path-4471";

/// Exercise analyze (text, html, url, errors) and donate through a service
/// using an upstream backend with a credential, then scan the captured log.
pub async fn check_privacy() -> Result<(), String> {
    let capture = capture();
    let before = capture.contents().len();

    let endpoint = stub_upstream(SECRET).await;
    let backend = UpstreamBackend::new(UpstreamConfig {
        endpoint,
        model: "stub-model".into(),
        credential: Some(Credential::new(SECRET)),
    })
    .map_err(|e| e.to_string())?;

    let page = format!("<html><body><article><p>{ARTICLE}</p><p>{ARTICLE}</p></article></body></html>");
    let app = axum::Router::new().route(STORY_PATH, axum::routing::get(move || async move { axum::response::Html(page) }));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
    let story_url = format!("http://{}{STORY_PATH}", listener.local_addr().unwrap());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = start(&config(&dir.path().join("d.jsonl")), std::sync::Arc::new(backend)).await;
    // A distinct source address, so any mention of the client is visible.
    let client = reqwest::Client::builder()
        .local_address("127.0.0.9".parse::<std::net::IpAddr>().unwrap())
        .build()
        .map_err(|e| e.to_string())?;
    let analyze = format!("{base}/v1/analyze");

    let (s, report) = post_json(&client, &analyze, &json!({"text": ARTICLE, "echo_body": true})).await;
    if s.as_u16() != 200 {
        return Err(format!("text analyze failed: {s} {report}"));
    }
    post_json(&client, &analyze, &json!({"text": ARTICLE})).await;
    let html = format!("<html><body><p>{ARTICLE}</p><p>{ARTICLE} Again.</p></body></html>");
    post_json(&client, &analyze, &json!({"html": html})).await;
    let (s, body) = post_json(&client, &analyze, &json!({"url": story_url})).await;
    if s.as_u16() != 200 {
        return Err(format!("url analyze failed: {s} {body}"));
    }
    post_json(&client, &analyze, &json!({"text": ARTICLE, "url": story_url})).await;
    let report: serde_json::Value = serde_json::from_str(&report).map_err(|e| e.to_string())?;
    post_json(&client, &format!("{base}/v1/donate"), &json!({"report": report, "consent": true})).await;
    post_json(&client, &format!("{base}/v1/donate"), &json!({"report": report, "consent": false})).await;

    let log = capture.contents()[before..].to_string();
    if !log.contains("analyze") || !log.contains("donate") {
        return Err(format!("expected request events in the captured log, got:\n{log}"));
    }
    let forbidden = [
        ("credential", SECRET.to_string()),
        ("article text", "Zebulon".to_string()),
        ("article text", "quartermaster".to_string()),
        ("article text", "harbour regime".to_string()),
        ("url", "canary-path".to_string()),
        ("url", story_url.clone()),
        ("client address", "127.0.0.9".to_string()),
    ];
    let leaks: Vec<String> = forbidden
        .iter()
        .filter(|(_, needle)| log.contains(needle.as_str()))
        .map(|(what, needle)| format!("{what} ({needle:?})"))
        .collect();
    if leaks.is_empty() {
        Ok(())
    } else {
        Err(format!("log leaks {}:\n{log}", leaks.join(", ")))
    }
}
