use std::time::Duration;

use thiserror::Error;

/// Sent on every fetch instead of anything derived from the requesting client.
pub const FETCH_USER_AGENT: &str = "Mozilla/5.0 (compatible; biasscan-fetch/1.0)";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchLimits {
    pub max_bytes: usize,
    pub timeout: Duration,
}

impl Default for FetchLimits {
    fn default() -> Self {
        FetchLimits { max_bytes: 5 * 1024 * 1024, timeout: Duration::from_secs(10) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FetchError {
    #[error("only http(s) URLs can be fetched")]
    InvalidUrl,
    #[error("fetch timed out")]
    Timeout,
    #[error("document exceeds {limit} bytes")]
    TooLarge { limit: usize },
    /// `status` is `None` for transport failures such as a refused connection.
    #[error("fetch failed{}", .status.map(|s| format!(" with HTTP {s}")).unwrap_or_default())]
    HttpError { status: Option<u16> },
}

/// HTTP client for article pages. Builds every request from scratch, so no
/// header of the caller's own request can leak through.
#[derive(Debug, Clone)]
pub struct Fetcher {
    client: reqwest::Client,
    limits: FetchLimits,
}

impl Fetcher {
    pub fn new(limits: FetchLimits) -> Self {
        let client = reqwest::Client::builder()
            .user_agent(FETCH_USER_AGENT)
            .redirect(reqwest::redirect::Policy::limited(5))
            .timeout(limits.timeout)
            .build()
            .expect("static client configuration");
        Fetcher { client, limits }
    }

    pub async fn fetch(&self, url: &str) -> Result<String, FetchError> {
        let parsed = reqwest::Url::parse(url).map_err(|_| FetchError::InvalidUrl)?;
        if !matches!(parsed.scheme(), "http" | "https") {
            return Err(FetchError::InvalidUrl);
        }
        let mut resp = self
            .client
            .get(parsed)
            .header(reqwest::header::ACCEPT, "text/html,application/xhtml+xml;q=0.9,*/*;q=0.5")
            .send()
            .await
            .map_err(map_transport)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(FetchError::HttpError { status: Some(status.as_u16()) });
        }
        let limit = self.limits.max_bytes;
        if resp.content_length().is_some_and(|n| n > limit as u64) {
            return Err(FetchError::TooLarge { limit });
        }
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let mut body = Vec::new();
        while let Some(chunk) = resp.chunk().await.map_err(map_transport)? {
            if body.len() + chunk.len() > limit {
                return Err(FetchError::TooLarge { limit });
            }
            body.extend_from_slice(&chunk);
        }
        Ok(decode_html(&body, content_type.as_deref()))
    }
}

fn map_transport(e: reqwest::Error) -> FetchError {
    if e.is_timeout() {
        FetchError::Timeout
    } else {
        FetchError::HttpError { status: e.status().map(|s| s.as_u16()) }
    }
}

pub async fn fetch_url(url: &str, limits: &FetchLimits) -> Result<String, FetchError> {
    Fetcher::new(limits.clone()).fetch(url).await
}

fn charset_param(s: &str) -> Option<String> {
    let lower = s.to_ascii_lowercase();
    let at = lower.find("charset=")? + "charset=".len();
    let value: String = lower[at..]
        .trim_start_matches(['"', '\''])
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | ':' | '.'))
        .collect();
    (!value.is_empty()).then_some(value)
}

/// Decode an HTML byte stream: UTF-8 when valid, otherwise the charset
/// declared in the Content-Type header or a `<meta>` tag, replacing
/// undecodable bytes.
pub fn decode_html(bytes: &[u8], content_type: Option<&str>) -> String {
    if let Ok(s) = std::str::from_utf8(bytes) {
        return s.to_string();
    }
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(2048)]);
    let declared = content_type.and_then(charset_param).or_else(|| {
        let lower = head.to_ascii_lowercase();
        lower.match_indices("<meta").find_map(|(i, _)| {
            let tag_end = lower[i..].find('>').map_or(lower.len(), |e| i + e);
            charset_param(&lower[i..tag_end])
        })
    });
    match declared.and_then(|label| encoding_rs::Encoding::for_label(label.as_bytes())) {
        Some(enc) => enc.decode(bytes).0.into_owned(),
        None => String::from_utf8_lossy(bytes).into_owned(),
    }
}
