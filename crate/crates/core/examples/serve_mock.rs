//! Start the service with the mock backend, call it once, and exit.
//! Pass `--forever` to keep it running on 127.0.0.1:8080.

use std::sync::Arc;

use biasscan::service::{serve, spawn, ServiceConfig};
use biasscan::MockBackend;
use serde_json::{json, Value};

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join("biasscan-example");
    let config = ServiceConfig { donation_path: dir.join("donations.jsonl"), ..ServiceConfig::default() };
    let backend = Arc::new(MockBackend::with_default_lexicon());
    if std::env::args().any(|a| a == "--forever") {
        println!("listening on {}", config.listen_addr);
        return serve(&config, backend).await;
    }

    let (addr, _server) = spawn(&config, backend).await?;
    let client = reqwest::Client::new();
    let body = json!({"text": "Critics say the scheme is outrageous. The vote is on Friday."});
    for _ in 0..2 {
        let report: Value = client
            .post(format!("http://{addr}/v1/analyze"))
            .json(&body)
            .send()
            .await
            .and_then(|r| r.error_for_status())
            .expect("analyze succeeds")
            .json()
            .await
            .expect("JSON report");
        println!(
            "score {} findings {} cache_hit {}",
            report["score"]["score"],
            report["findings"].as_array().map_or(0, Vec::len),
            report["provenance"]["cache_hit"]
        );
    }
    Ok(())
}
