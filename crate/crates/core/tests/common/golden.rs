use std::path::{Path, PathBuf};
use std::process::Command;

use biasscan::classifier::{ClassifyConfig, MockBackend};
use biasscan::extraction::Article;
use biasscan::report::analyze;

pub const EPOCH: &str = "1970-01-01T00:00:00Z";

pub fn manifest_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(manifest_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Replace the value of every `"created_at"` field with the epoch.
pub fn normalize_timestamp(json: &str) -> String {
    const KEY: &str = "\"created_at\": \"";
    let mut out = String::with_capacity(json.len());
    let mut rest = json;
    while let Some(pos) = rest.find(KEY) {
        let value_start = pos + KEY.len();
        let value_len = rest[value_start..].find('"').expect("closing quote");
        out.push_str(&rest[..value_start]);
        out.push_str(EPOCH);
        rest = &rest[value_start + value_len..];
    }
    out.push_str(rest);
    out
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_biasscan")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn first_difference(a: &str, b: &str) -> String {
    let line = a.lines().zip(b.lines()).position(|(x, y)| x != y).unwrap_or(a.lines().count().min(b.lines().count()));
    format!(
        "first difference at line {}: {:?} vs {:?}",
        line + 1,
        a.lines().nth(line).unwrap_or("<eof>"),
        b.lines().nth(line).unwrap_or("<eof>")
    )
}

/// The mock analysis of the trigger fixture, through both the CLI and the
/// library, must reproduce the committed golden files.
pub fn check_golden_report() -> Result<(), String> {
    let fixture = manifest_path("tests/fixtures/trigger_article.txt");
    let fixture = fixture.to_str().unwrap();
    let golden_json = read("tests/golden/trigger_report.json");
    let golden_text = read("tests/golden/trigger_report.txt");

    let cli_json = run_cli(&["analyze", "--backend", "mock", "--format", "json", "--file", fixture])?;
    if normalize_timestamp(&cli_json) != golden_json {
        return Err(format!("CLI JSON differs from golden; {}", first_difference(&cli_json, &golden_json)));
    }
    let cli_text = run_cli(&["analyze", "--backend", "mock", "--file", fixture])?;
    if cli_text != golden_text {
        return Err(format!("CLI text differs from golden; {}", first_difference(&cli_text, &golden_text)));
    }

    let article = Article::from_text(&read("tests/fixtures/trigger_article.txt"));
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    let report = rt
        .block_on(analyze(&article, &MockBackend::with_default_lexicon(), &ClassifyConfig::default(), false))
        .map_err(|e| e.to_string())?;
    let lib_json = normalize_timestamp(&report.to_json()) + "\n";
    if lib_json != golden_json {
        return Err(format!("library JSON differs from golden; {}", first_difference(&lib_json, &golden_json)));
    }
    Ok(())
}
