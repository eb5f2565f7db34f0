use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use biasscan::classifier::{MockBackend, ModelBackend};
use biasscan::service::{spawn, ServiceConfig};
use serde_json::{json, Value};

pub const TRIGGER: &str = include_str!("../fixtures/trigger_article.txt");

pub fn config(donations: &Path) -> ServiceConfig {
    ServiceConfig { donation_path: donations.to_path_buf(), ..ServiceConfig::default() }
}

pub async fn start(config: &ServiceConfig, backend: Arc<dyn ModelBackend>) -> String {
    let (addr, _handle): (SocketAddr, _) = spawn(config, backend).await.expect("service starts");
    format!("http://{addr}")
}

pub async fn start_mock(config: &ServiceConfig) -> String {
    start(config, Arc::new(MockBackend::with_default_lexicon())).await
}

/// POST a JSON body and return status and raw response text.
pub async fn post_json(client: &reqwest::Client, url: &str, body: &Value) -> (StatusCode, String) {
    let resp = client.post(url).json(body).send().await.expect("request sent");
    let status = StatusCode::from_u16(resp.status().as_u16()).unwrap();
    (status, resp.text().await.unwrap())
}

/// A chat-completions endpoint answering like the mock backend. Requests
/// without `Bearer <secret>` get 401.
pub async fn stub_upstream(secret: &'static str) -> String {
    let mock = Arc::new(MockBackend::with_default_lexicon());
    let app = Router::new().route(
        "/v1/chat/completions",
        post(move |headers: HeaderMap, Json(body): Json<Value>| {
            let mock = mock.clone();
            async move {
                let auth = headers.get("authorization").and_then(|v| v.to_str().ok()).unwrap_or_default();
                if auth != format!("Bearer {secret}") {
                    return (StatusCode::UNAUTHORIZED, Json(json!({"error": "bad key"})));
                }
                let user = body["messages"]
                    .as_array()
                    .and_then(|m| m.iter().find(|m| m["role"] == "user"))
                    .and_then(|m| m["content"].as_str())
                    .unwrap_or_default()
                    .to_string();
                let content = mock.respond(&user);
                (StatusCode::OK, Json(json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]})))
            }
        }),
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}/v1/chat/completions")
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Cache hit, exactly-one-input, consent and rate-limit behavior against a
/// locally started service with the mock backend.
pub async fn check_contract() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let client = reqwest::Client::new();

    let base = start_mock(&config(&dir.path().join("donations.jsonl"))).await;
    let analyze = format!("{base}/v1/analyze");

    let (s1, first) = post_json(&client, &analyze, &json!({"text": TRIGGER})).await;
    ensure(s1 == StatusCode::OK, || format!("first analyze: {s1} {first}"))?;
    let report: Value = serde_json::from_str(&first).map_err(|e| e.to_string())?;
    let indices: Vec<u64> = report["findings"].as_array().unwrap().iter().map(|f| f["sentence_index"].as_u64().unwrap()).collect();
    ensure(indices == [1, 3], || format!("findings at {indices:?}"))?;
    ensure(report["provenance"]["cache_hit"] == json!(false), || "first response marked as cache hit".into())?;

    let (s2, second) = post_json(&client, &analyze, &json!({"text": TRIGGER})).await;
    ensure(s2 == StatusCode::OK, || format!("second analyze: {s2}"))?;
    ensure(second.contains("\"cache_hit\":true"), || "second response not a cache hit".into())?;
    ensure(second.replacen("\"cache_hit\":true", "\"cache_hit\":false", 1) == first, || {
        "cached report differs from the original beyond cache_hit".into()
    })?;

    let (s3, both) = post_json(&client, &analyze, &json!({"text": TRIGGER, "url": "http://example.com/"})).await;
    ensure(s3 == StatusCode::BAD_REQUEST, || format!("text+url gave {s3}"))?;
    ensure(both.contains("invalid_request"), || format!("text+url body {both}"))?;

    let donate = format!("{base}/v1/donate");
    let (s4, body4) = post_json(&client, &donate, &json!({"report": report, "consent": false})).await;
    ensure(s4 == StatusCode::BAD_REQUEST, || format!("consent=false gave {s4} {body4}"))?;
    let (s5, _) = post_json(&client, &donate, &json!({"report": report})).await;
    ensure(s5 == StatusCode::BAD_REQUEST, || format!("missing consent gave {s5}"))?;
    let stored = std::fs::read_to_string(dir.path().join("donations.jsonl")).unwrap_or_default();
    ensure(stored.is_empty(), || "a consentless donation was stored".into())?;

    // A fresh service, so earlier requests do not count against the bucket.
    let base = start_mock(&config(&dir.path().join("d2.jsonl"))).await;
    let analyze = format!("{base}/v1/analyze");
    for i in 1..=15 {
        let (s, body) = post_json(&client, &analyze, &json!({"text": TRIGGER})).await;
        ensure(s == StatusCode::OK, || format!("request {i} of 15 gave {s} {body}"))?;
    }
    let resp = client.post(&analyze).json(&json!({"text": TRIGGER})).send().await.map_err(|e| e.to_string())?;
    ensure(resp.status().as_u16() == 429, || format!("16th request gave {}", resp.status()))?;
    let retry = resp.headers().get("retry-after").and_then(|v| v.to_str().ok()).and_then(|v| v.parse::<u64>().ok());
    ensure(retry.is_some_and(|r| (1..=60).contains(&r)), || format!("Retry-After {retry:?}"))?;
    Ok(())
}
