use std::time::Duration;

use async_trait::async_trait;
use serde::Serialize;
use thiserror::Error;

use super::prompt::PromptBundle;

/// Per-call limits handed to a backend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CallLimits {
    #[serde(with = "millis")]
    pub timeout: Duration,
    pub max_tokens: u32,
    /// Sampling temperature. Zero is the most deterministic setting the
    /// chat-completions protocol offers.
    pub temperature: f32,
}

impl Default for CallLimits {
    fn default() -> Self {
        CallLimits { timeout: Duration::from_secs(60), max_tokens: 4096, temperature: 0.0 }
    }
}

mod millis {
    use std::time::Duration;

    pub fn serialize<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("model backend timed out")]
    Timeout,
    #[error("model backend transport error: {0}")]
    Transport(String),
    #[error("model backend returned HTTP {0}")]
    Status(u16),
    #[error("model backend protocol error: {0}")]
    Protocol(String),
}

/// Something that turns a prompt into raw model text.
///
/// Implementations must be safe for concurrent calls and must not keep
/// prompt contents around after `complete` returns.
#[async_trait]
pub trait ModelBackend: Send + Sync {
    fn model_id(&self) -> &str;

    async fn complete(&self, prompt: &PromptBundle, limits: &CallLimits)
        -> Result<String, BackendError>;
}

#[async_trait]
impl<T: ModelBackend + ?Sized> ModelBackend for std::sync::Arc<T> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    async fn complete(
        &self,
        prompt: &PromptBundle,
        limits: &CallLimits,
    ) -> Result<String, BackendError> {
        (**self).complete(prompt, limits).await
    }
}
