//! Classify through an OpenAI-compatible chat-completions endpoint.
//!
//! With BIASSCAN_UPSTREAM_URL and BIASSCAN_MODEL set (and optionally
//! BIASSCAN_UPSTREAM_KEY) the real endpoint is used. Otherwise a local stub
//! that answers like the mock backend stands in.

use std::sync::Arc;

use axum::routing::post;
use axum::{Json, Router};
use biasscan::classifier::{UpstreamBackend, UpstreamConfig};
use biasscan::report::analyze;
use biasscan::{Article, ClassifyConfig, MockBackend};
use serde_json::{json, Value};

async fn local_stub() -> String {
    let mock = Arc::new(MockBackend::with_default_lexicon());
    let app = Router::new().route(
        "/v1/chat/completions",
        post(move |Json(req): Json<Value>| {
            let mock = mock.clone();
            async move {
                let user = req["messages"][1]["content"].as_str().unwrap_or_default().to_string();
                Json(json!({"choices": [{"message": {"role": "assistant", "content": mock.respond(&user)}}]}))
            }
        }),
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}/v1/chat/completions")
}

#[tokio::main]
async fn main() {
    let config = match UpstreamConfig::from_env() {
        Ok(c) => c,
        Err(_) => UpstreamConfig { endpoint: local_stub().await, model: "local-stub".into(), credential: None },
    };
    let backend = UpstreamBackend::new(config).expect("valid upstream config");
    let article = Article::from_text("The minister slammed the report. Experts say it could spell trouble.");
    match analyze(&article, &backend, &ClassifyConfig::default(), false).await {
        Ok(report) => print!("{}", report.render_text()),
        Err(e) => eprintln!("analysis failed: {e}"),
    }
}
