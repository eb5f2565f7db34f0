//! HTTP service: analysis, report donation, taxonomy and schema endpoints.
//!
//! The service sits between readers and the model backend. Callers never
//! talk to the backend, the upstream credential stays on the server, and
//! logs carry counts and hashes only.

mod cache;
mod donation;
mod rate_limit;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{ConnectInfo, DefaultBodyLimit, FromRequestParts, State};
use axum::http::{header, request::Parts, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use cache::{cache_key, normalize_body, CacheKey, ReportCache};
pub use donation::{new_donation_id, DonatedReport, DonationStore};
pub use rate_limit::RateLimiter;

use crate::classifier::{
    ClassifyConfig, ClassifyError, Credential, ModelBackend, UpstreamConfig, UpstreamConfigError,
    ENV_MODEL, ENV_UPSTREAM_KEY, ENV_UPSTREAM_URL, PROMPT_VERSION,
};
use crate::extraction::{extract_article, Article, ExtractError, FetchError, FetchLimits, Fetcher};
use crate::report::{analyze, report_schema, AnalyzeError, BiasReport, ReportArticle};
use crate::taxonomy::{taxonomy_document, TAXONOMY_VERSION};

pub const ENV_CONFIG: &str = "BIASSCAN_CONFIG";
pub const ENV_LISTEN_ADDR: &str = "BIASSCAN_LISTEN_ADDR";
pub const ENV_CACHE_TTL_S: &str = "BIASSCAN_CACHE_TTL_S";
pub const ENV_CACHE_CAPACITY: &str = "BIASSCAN_CACHE_CAPACITY";
pub const ENV_RATE_PER_MIN: &str = "BIASSCAN_RATE_PER_MIN";
pub const ENV_RATE_BURST: &str = "BIASSCAN_RATE_BURST";
pub const ENV_DONATION_PATH: &str = "BIASSCAN_DONATION_PATH";
pub const ENV_CORS_ORIGINS: &str = "BIASSCAN_CORS_ORIGINS";
pub const ENV_API_KEYS: &str = "BIASSCAN_API_KEYS";
pub const ENV_UPSTREAM_PARALLELISM: &str = "BIASSCAN_UPSTREAM_PARALLELISM";

/// Header carrying an optional client API key. `Authorization: Bearer` works too.
pub const API_KEY_HEADER: &str = "x-api-key";

/// Service settings. Field names double as keys of the TOML config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen_addr: String,
    pub upstream_url: Option<String>,
    pub upstream_key: Option<Credential>,
    pub model: Option<String>,
    pub cache_ttl_s: u64,
    pub cache_capacity: usize,
    pub rate_per_min: u32,
    pub rate_burst: u32,
    pub donation_path: PathBuf,
    /// Origins allowed by CORS. Empty disables CORS headers.
    pub cors_origins: Vec<String>,
    /// When non-empty, analyze and donate require one of these keys.
    pub api_keys: Vec<Credential>,
    pub upstream_parallelism: usize,
    /// Cap on `text` and `html` request fields, in bytes.
    pub max_input_bytes: usize,
    pub fetch_timeout_s: u64,
    pub fetch_max_bytes: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let fetch = FetchLimits::default();
        ServiceConfig {
            listen_addr: "127.0.0.1:8080".into(),
            upstream_url: None,
            upstream_key: None,
            model: None,
            cache_ttl_s: 24 * 60 * 60,
            cache_capacity: 1024,
            rate_per_min: 10,
            rate_burst: 5,
            donation_path: PathBuf::from("donations.jsonl"),
            cors_origins: Vec::new(),
            api_keys: Vec::new(),
            upstream_parallelism: 4,
            max_input_bytes: 1_000_000,
            fetch_timeout_s: fetch.timeout.as_secs(),
            fetch_max_bytes: fetch.max_bytes,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for {var}")]
    InvalidVar { var: &'static str },
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
}

impl ServiceConfig {
    /// Defaults, then the config file (`file`, else `BIASSCAN_CONFIG`),
    /// then environment variables.
    pub fn load(file: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let file = file.map(Path::to_path_buf).or_else(|| env(ENV_CONFIG).map(PathBuf::from));
        let mut cfg = match file {
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
                toml::from_str(&text).map_err(|e| ConfigError::Parse { path, message: e.message().to_string() })?
            }
            None => ServiceConfig::default(),
        };
        fn num<T: std::str::FromStr>(var: &'static str, v: String) -> Result<T, ConfigError> {
            v.trim().parse().map_err(|_| ConfigError::InvalidVar { var })
        }
        if let Some(v) = env(ENV_LISTEN_ADDR) {
            cfg.listen_addr = v;
        }
        if let Some(v) = env(ENV_UPSTREAM_URL) {
            cfg.upstream_url = Some(v);
        }
        if let Some(v) = env(ENV_UPSTREAM_KEY) {
            cfg.upstream_key = Some(Credential::new(v));
        }
        if let Some(v) = env(ENV_MODEL) {
            cfg.model = Some(v);
        }
        if let Some(v) = env(ENV_CACHE_TTL_S) {
            cfg.cache_ttl_s = num(ENV_CACHE_TTL_S, v)?;
        }
        if let Some(v) = env(ENV_CACHE_CAPACITY) {
            cfg.cache_capacity = num(ENV_CACHE_CAPACITY, v)?;
        }
        if let Some(v) = env(ENV_RATE_PER_MIN) {
            cfg.rate_per_min = num(ENV_RATE_PER_MIN, v)?;
        }
        if let Some(v) = env(ENV_RATE_BURST) {
            cfg.rate_burst = num(ENV_RATE_BURST, v)?;
        }
        if let Some(v) = env(ENV_UPSTREAM_PARALLELISM) {
            cfg.upstream_parallelism = num(ENV_UPSTREAM_PARALLELISM, v)?;
        }
        if let Some(v) = env(ENV_DONATION_PATH) {
            cfg.donation_path = PathBuf::from(v);
        }
        if let Some(v) = env(ENV_CORS_ORIGINS) {
            cfg.cors_origins = split_list(&v);
        }
        if let Some(v) = env(ENV_API_KEYS) {
            cfg.api_keys = split_list(&v).into_iter().map(Credential::new).collect();
        }
        Ok(cfg)
    }

    pub fn from_env() -> Result<Self, ConfigError> {
        ServiceConfig::load(None, |k| std::env::var(k).ok())
    }

    pub fn upstream(&self) -> Result<UpstreamConfig, UpstreamConfigError> {
        UpstreamConfig::from_lookup(|k| match k {
            ENV_UPSTREAM_URL => self.upstream_url.clone(),
            ENV_UPSTREAM_KEY => self.upstream_key.as_ref().map(|c| c.expose().to_string()),
            ENV_MODEL => self.model.clone(),
            _ => None,
        })
    }
}

struct AppState {
    backend: Arc<dyn ModelBackend>,
    classify: ClassifyConfig,
    cache: Mutex<ReportCache>,
    limiter: Mutex<RateLimiter>,
    donations: DonationStore,
    fetcher: Fetcher,
    upstream_slots: Semaphore,
    api_keys: Vec<Credential>,
    /// Per-process secret mixed into client address hashes.
    salt: [u8; 16],
    max_input_bytes: usize,
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    retry_after: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), retry_after: None }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(json!({"error": {"code": self.code, "message": self.message}}));
        let mut resp = (self.status, body).into_response();
        if let Some(secs) = self.retry_after {
            resp.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from(secs));
        }
        resp
    }
}

fn short_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    hex::encode(&h.finalize()[..8])
}

/// Rate-limit identity: a hash of the API key when one is presented and
/// keys are configured, else a salted hash of the peer IP. Neither the
/// key nor the address is kept.
struct ClientKey(String);

impl FromRequestParts<Arc<AppState>> for ClientKey {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Arc<AppState>) -> Result<Self, Self::Rejection> {
        if !state.api_keys.is_empty() {
            let presented = parts
                .headers
                .get(API_KEY_HEADER)
                .and_then(|v| v.to_str().ok())
                .or_else(|| {
                    parts
                        .headers
                        .get(header::AUTHORIZATION)
                        .and_then(|v| v.to_str().ok())
                        .and_then(|v| v.strip_prefix("Bearer "))
                })
                .map(str::trim);
            return match presented {
                Some(k) if state.api_keys.iter().any(|c| c.expose() == k) => {
                    Ok(ClientKey(format!("key:{}", short_hash(&[&state.salt, k.as_bytes()]))))
                }
                _ => Err(ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or unknown API key")),
            };
        }
        let ip = parts.extensions.get::<ConnectInfo<SocketAddr>>().map(|c| c.0.ip().to_string()).unwrap_or_default();
        Ok(ClientKey(format!("peer:{}", short_hash(&[&state.salt, ip.as_bytes()]))))
    }
}

fn check_rate(state: &AppState, client: &ClientKey) -> Result<(), ApiError> {
    let mut limiter = state.limiter.lock().unwrap_or_else(|p| p.into_inner());
    limiter.check(&client.0, Instant::now()).map_err(|wait| {
        let mut e = ApiError::new(StatusCode::TOO_MANY_REQUESTS, "rate_limited", "too many requests");
        e.retry_after = Some(wait);
        e
    })
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        // serde messages can quote input; report only the position.
        ApiError::bad_request(format!("malformed JSON body at line {} column {}", e.line(), e.column()))
    })
}

#[derive(Debug, Deserialize)]
struct AnalyzeRequest {
    text: Option<String>,
    html: Option<String>,
    url: Option<String>,
    language_hint: Option<String>,
    #[serde(default)]
    echo_body: bool,
}

enum Input {
    Text(String),
    Html(String),
    Url(String),
}

impl Input {
    fn kind(&self) -> &'static str {
        match self {
            Input::Text(_) => "text",
            Input::Html(_) => "html",
            Input::Url(_) => "url",
        }
    }
}

fn validate(req: AnalyzeRequest, max_bytes: usize) -> Result<(Input, Option<String>, bool), ApiError> {
    let input = match (req.text, req.html, req.url) {
        (Some(t), None, None) => Input::Text(t),
        (None, Some(h), None) => Input::Html(h),
        (None, None, Some(u)) => Input::Url(u),
        _ => return Err(ApiError::bad_request("exactly one of text, html or url is required")),
    };
    if let Input::Text(s) | Input::Html(s) = &input {
        if s.len() > max_bytes {
            return Err(ApiError::bad_request(format!("input exceeds {max_bytes} bytes")));
        }
    }
    let hint = req.language_hint.map(|h| h.trim().to_string()).filter(|h| !h.is_empty());
    Ok((input, hint, req.echo_body))
}

fn extract_error(e: ExtractError) -> ApiError {
    match e {
        ExtractError::NoContentFound => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_content_found", e.to_string()),
        ExtractError::MalformedInput(_) => ApiError::bad_request(e.to_string()),
    }
}

fn fetch_error(e: FetchError) -> ApiError {
    match e {
        FetchError::InvalidUrl => ApiError::bad_request(e.to_string()),
        FetchError::Timeout => ApiError::new(StatusCode::GATEWAY_TIMEOUT, "fetch_timeout", e.to_string()),
        FetchError::TooLarge { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "document_too_large", e.to_string()),
        FetchError::HttpError { .. } => ApiError::new(StatusCode::BAD_GATEWAY, "fetch_failed", e.to_string()),
    }
}

fn analyze_error(e: AnalyzeError) -> ApiError {
    match e {
        AnalyzeError::Classify(ClassifyError::EmptyArticle) => {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_article", "article has no text to classify")
        }
        AnalyzeError::Classify(ClassifyError::BackendUnavailable { timed_out: true, .. }) => {
            ApiError::new(StatusCode::GATEWAY_TIMEOUT, "upstream_timeout", "model backend timed out")
        }
        AnalyzeError::Classify(ClassifyError::BackendUnavailable { .. }) => {
            ApiError::new(StatusCode::BAD_GATEWAY, "backend_unavailable", "model backend unavailable")
        }
        AnalyzeError::Report(_) => {
            ApiError::new(StatusCode::BAD_GATEWAY, "invalid_backend_output", "model output failed validation")
        }
    }
}

async fn resolve_article(state: &AppState, input: &Input) -> Result<Article, ApiError> {
    match input {
        Input::Text(t) => Ok(Article::from_text(t)),
        Input::Html(h) => extract_article(h, None).map_err(extract_error),
        Input::Url(u) => {
            let html = state.fetcher.fetch(u).await.map_err(fetch_error)?;
            let mut article = extract_article(&html, Some(u)).map_err(extract_error)?;
            article.source_url = Some(u.clone());
            Ok(article)
        }
    }
}

async fn handle_analyze(State(state): State<Arc<AppState>>, client: ClientKey, body: Bytes) -> Response {
    let started = Instant::now();
    let request_id = format!("{:016x}", rand::random::<u64>());
    let mut input_kind = "invalid";
    let mut url_hash = None;
    let mut cache_hit = false;
    let mut counts = (0usize, 0usize);

    let result: Result<BiasReport, ApiError> = async {
        check_rate(&state, &client)?;
        let (input, hint, echo_body) = validate(parse_body(&body)?, state.max_input_bytes)?;
        input_kind = input.kind();
        if let Input::Url(u) = &input {
            url_hash = Some(short_hash(&[u.as_bytes()]));
        }
        let mut article = resolve_article(&state, &input).await?;
        if hint.is_some() {
            article.language_hint = hint;
        }
        article.body_text = normalize_body(&article.body_text);
        if article.body_text.is_empty() {
            return Err(analyze_error(AnalyzeError::Classify(ClassifyError::EmptyArticle)));
        }

        let key = cache_key(&article.body_text, state.backend.model_id(), PROMPT_VERSION, TAXONOMY_VERSION);
        let cached = state.cache.lock().unwrap_or_else(|p| p.into_inner()).get(&key, Instant::now());
        if let Some(mut report) = cached {
            cache_hit = true;
            report.article = ReportArticle::from_article(&article, echo_body);
            report.provenance.cache_hit = true;
            return Ok(report);
        }

        let _slot = state.upstream_slots.acquire().await.expect("semaphore is never closed");
        let mut report = analyze(&article, state.backend.as_ref(), &state.classify, echo_body)
            .await
            .map_err(analyze_error)?;
        // Cached copies never hold the body; it is re-attached per request.
        let mut stored = report.clone();
        stored.article.body_text = None;
        state.cache.lock().unwrap_or_else(|p| p.into_inner()).insert(key, stored, Instant::now());
        report.provenance.cache_hit = false;
        Ok(report)
    }
    .await;

    if let Ok(r) = &result {
        counts = (r.sentences.len(), r.findings.len());
    }
    let status = result.as_ref().map_or_else(|e| e.status, |_| StatusCode::OK);
    tracing::info!(
        request_id = %request_id,
        input = input_kind,
        url_hash = url_hash.as_deref().unwrap_or("-"),
        sentences = counts.0,
        findings = counts.1,
        cache_hit,
        status = status.as_u16(),
        latency_ms = started.elapsed().as_millis() as u64,
        "analyze"
    );
    match result {
        Ok(report) => Json(report).into_response(),
        Err(e) => e.into_response(),
    }
}

#[derive(Debug, Deserialize)]
struct DonateRequest {
    report: Option<serde_json::Value>,
    consent: Option<serde_json::Value>,
}

async fn handle_donate(State(state): State<Arc<AppState>>, client: ClientKey, body: Bytes) -> Response {
    let request_id = format!("{:016x}", rand::random::<u64>());
    let result: Result<String, ApiError> = async {
        check_rate(&state, &client)?;
        let req: DonateRequest = parse_body(&body)?;
        if req.consent != Some(serde_json::Value::Bool(true)) {
            return Err(ApiError::bad_request("donation requires consent: true"));
        }
        let raw = req.report.ok_or_else(|| ApiError::bad_request("missing report"))?;
        let report = BiasReport::from_json(&raw.to_string())
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_report", e.to_string()))?;
        let store = state.donations.clone();
        tokio::task::spawn_blocking(move || store.append(report))
            .await
            .map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", "donation not stored"))?
            .map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", "donation not stored"))
    }
    .await;
    let status = result.as_ref().map_or_else(|e| e.status, |_| StatusCode::OK);
    tracing::info!(request_id = %request_id, status = status.as_u16(), "donate");
    match result {
        Ok(id) => Json(json!({"id": id})).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn handle_taxonomy() -> Response {
    Json(taxonomy_document()).into_response()
}

async fn handle_health(State(state): State<Arc<AppState>>) -> Response {
    Json(json!({
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "model_id": state.backend.model_id(),
        "prompt_version": PROMPT_VERSION,
        "taxonomy_version": TAXONOMY_VERSION,
    }))
    .into_response()
}

async fn handle_schema() -> Response {
    Json(report_schema()).into_response()
}

/// Build the application router. Opens (creating if needed) the donation
/// store.
pub fn router(config: &ServiceConfig, backend: Arc<dyn ModelBackend>) -> std::io::Result<Router> {
    let state = Arc::new(AppState {
        backend,
        classify: ClassifyConfig::default(),
        cache: Mutex::new(ReportCache::new(Duration::from_secs(config.cache_ttl_s), config.cache_capacity)),
        limiter: Mutex::new(RateLimiter::new(config.rate_per_min, config.rate_burst)),
        donations: DonationStore::open(&config.donation_path)?,
        fetcher: Fetcher::new(FetchLimits {
            max_bytes: config.fetch_max_bytes,
            timeout: Duration::from_secs(config.fetch_timeout_s),
        }),
        upstream_slots: Semaphore::new(config.upstream_parallelism.max(1)),
        api_keys: config.api_keys.clone(),
        salt: rand::random(),
        max_input_bytes: config.max_input_bytes,
    });
    let mut app = Router::new()
        .route("/v1/analyze", post(handle_analyze))
        .route("/v1/donate", post(handle_donate))
        .route("/v1/taxonomy", get(handle_taxonomy))
        .route("/v1/health", get(handle_health))
        .route("/v1/schema/report", get(handle_schema))
        .layer(DefaultBodyLimit::max(config.max_input_bytes.saturating_mul(2).saturating_add(64 * 1024)))
        .with_state(state);
    let origins: Vec<HeaderValue> = config.cors_origins.iter().filter_map(|o| o.parse().ok()).collect();
    if !origins.is_empty() {
        app = app.layer(
            CorsLayer::new()
                .allow_origin(AllowOrigin::list(origins))
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE, header::AUTHORIZATION, header::HeaderName::from_static(API_KEY_HEADER)]),
        );
    }
    Ok(app)
}

/// Serve on an already bound listener until the task is dropped.
pub async fn serve_on(listener: TcpListener, config: &ServiceConfig, backend: Arc<dyn ModelBackend>) -> std::io::Result<()> {
    let app = router(config, backend)?;
    axum::serve(listener, app.into_make_service_with_connect_info::<SocketAddr>()).await
}

pub async fn serve(config: &ServiceConfig, backend: Arc<dyn ModelBackend>) -> std::io::Result<()> {
    let listener = TcpListener::bind(&config.listen_addr).await?;
    tracing::info!(model_id = backend.model_id(), "listening on {}", listener.local_addr()?);
    serve_on(listener, config, backend).await
}

/// Start the service on an ephemeral local port in the background.
pub async fn spawn(
    config: &ServiceConfig,
    backend: Arc<dyn ModelBackend>,
) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let app = router(config, backend)?;
    let handle = tokio::spawn(async move {
        axum::serve(listener, app.into_make_service_with_connect_info::<SocketAddr>()).await
    });
    Ok((addr, handle))
}
