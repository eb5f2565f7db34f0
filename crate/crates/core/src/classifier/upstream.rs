//! OpenAI-compatible chat-completions backend.

use std::fmt;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::backend::{BackendError, CallLimits, ModelBackend};
use super::prompt::PromptBundle;

pub const ENV_UPSTREAM_URL: &str = "BIASSCAN_UPSTREAM_URL";
pub const ENV_UPSTREAM_KEY: &str = "BIASSCAN_UPSTREAM_KEY";
pub const ENV_MODEL: &str = "BIASSCAN_MODEL";

/// An API credential. Never printed, not even by `Debug`.
#[derive(Clone, PartialEq, Eq, Deserialize)]
#[serde(transparent)]
pub struct Credential(String);

impl Credential {
    pub fn new(secret: impl Into<String>) -> Self {
        Credential(secret.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Credential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Credential(<redacted>)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpstreamConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub credential: Option<Credential>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpstreamConfigError {
    #[error("environment variable {0} is not set")]
    Missing(&'static str),
    #[error("upstream URL must be http(s): {0}")]
    BadUrl(String),
}

impl UpstreamConfig {
    pub fn from_env() -> Result<Self, UpstreamConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, UpstreamConfigError> {
        let endpoint = get(ENV_UPSTREAM_URL)
            .filter(|s| !s.trim().is_empty())
            .ok_or(UpstreamConfigError::Missing(ENV_UPSTREAM_URL))?;
        let model = get(ENV_MODEL)
            .filter(|s| !s.trim().is_empty())
            .ok_or(UpstreamConfigError::Missing(ENV_MODEL))?;
        let credential = get(ENV_UPSTREAM_KEY).filter(|s| !s.is_empty()).map(Credential);
        let cfg = UpstreamConfig { endpoint: endpoint.trim().to_string(), model: model.trim().to_string(), credential };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UpstreamConfigError> {
        match reqwest::Url::parse(&self.endpoint) {
            Ok(u) if matches!(u.scheme(), "http" | "https") => Ok(()),
            _ => Err(UpstreamConfigError::BadUrl(self.endpoint.clone())),
        }
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 2],
    temperature: f32,
    max_tokens: u32,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

pub struct UpstreamBackend {
    config: UpstreamConfig,
    client: reqwest::Client,
}

impl fmt::Debug for UpstreamBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UpstreamBackend").field("config", &self.config).finish_non_exhaustive()
    }
}

impl UpstreamBackend {
    pub fn new(config: UpstreamConfig) -> Result<Self, UpstreamConfigError> {
        config.validate()?;
        let client = reqwest::Client::builder()
            .user_agent(concat!("biasscan/", env!("CARGO_PKG_VERSION")))
            .build()
            .expect("static client configuration");
        Ok(UpstreamBackend { config, client })
    }
}

#[async_trait]
impl ModelBackend for UpstreamBackend {
    fn model_id(&self) -> &str {
        &self.config.model
    }

    async fn complete(&self, prompt: &PromptBundle, limits: &CallLimits) -> Result<String, BackendError> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: [
                ChatMessage { role: "system", content: &prompt.system_message },
                ChatMessage { role: "user", content: &prompt.user_message },
            ],
            temperature: limits.temperature,
            max_tokens: limits.max_tokens,
        };
        let mut req = self.client.post(&self.config.endpoint).timeout(limits.timeout).json(&body);
        if let Some(key) = &self.config.credential {
            req = req.bearer_auth(key.expose());
        }
        // Transport errors are reduced to their kind; reqwest's messages
        // carry the URL, which may embed a key in its query string.
        let resp = req.send().await.map_err(transport_error)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(BackendError::Status(status.as_u16()));
        }
        let parsed: ChatResponse = resp.json().await.map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Protocol("malformed chat-completions response".into())
            }
        })?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| BackendError::Protocol("response has no message content".into()))
    }
}

fn transport_error(e: reqwest::Error) -> BackendError {
    if e.is_timeout() {
        BackendError::Timeout
    } else if e.is_connect() {
        BackendError::Transport("connection failed".into())
    } else {
        BackendError::Transport("request failed".into())
    }
}
