//! Configuration and errors shared by the remote chat and translation clients.

use std::time::Duration;

use thiserror::Error;
use url::Url;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    #[error("provider rejected the request (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("provider timed out after {0:?}")]
    Timeout(Duration),
    #[error("provider returned an empty completion")]
    EmptyCompletion,
    #[error("provider returned {got} translations for {expected} inputs")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Clone)]
pub struct ProviderConfig {
    pub base_url: Url,
    pub api_key: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub temperature: f32,
    /// First backoff delay; doubles after each failed attempt.
    pub retry_base_delay: Duration,
}

impl ProviderConfig {
    pub fn new(base_url: Url, api_key: impl Into<String>) -> Self {
        Self {
            base_url,
            api_key: api_key.into(),
            timeout: Duration::from_secs(60),
            max_retries: 2,
            temperature: 0.0,
            retry_base_delay: Duration::from_millis(500),
        }
    }

    /// Joins `path` onto the base URL, keeping any path prefix the base carries.
    pub(crate) fn endpoint(&self, path: &str) -> String {
        format!(
            "{}/{}",
            self.base_url.as_str().trim_end_matches('/'),
            path.trim_start_matches('/')
        )
    }

    pub(crate) fn http_client(&self) -> Result<reqwest::Client, ProviderError> {
        if self.timeout.is_zero() {
            return Err(ProviderError::Unavailable(
                "timeout must be positive".into(),
            ));
        }
        reqwest::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| ProviderError::Unavailable(format!("failed to build HTTP client: {e}")))
    }
}

impl std::fmt::Debug for ProviderConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProviderConfig")
            .field("base_url", &self.base_url.as_str())
            .field("has_api_key", &!self.api_key.is_empty())
            .field("timeout", &self.timeout)
            .field("max_retries", &self.max_retries)
            .field("temperature", &self.temperature)
            .finish()
    }
}

/// Sends `send()` up to `1 + max_retries` times with exponential backoff.
/// 5xx, 429, connection failures and timeouts are retried; other 4xx are not.
pub(crate) async fn send_with_retry<F, Fut>(
    config: &ProviderConfig,
    mut send: F,
) -> Result<reqwest::Response, ProviderError>
where
    F: FnMut() -> Fut,
    Fut: std::future::Future<Output = Result<reqwest::Response, reqwest::Error>>,
{
    let mut delay = config.retry_base_delay;
    let mut attempt = 0;
    loop {
        let error = match send().await {
            Ok(resp) if resp.status().is_success() => return Ok(resp),
            Ok(resp) => {
                let status = resp.status();
                let body = resp.text().await.unwrap_or_default();
                if status.is_server_error() {
                    ProviderError::Unavailable(format!("HTTP {}: {body}", status.as_u16()))
                } else {
                    let rejected = ProviderError::Rejected {
                        status: status.as_u16(),
                        body,
                    };
                    if status.as_u16() != 429 {
                        return Err(rejected);
                    }
                    rejected
                }
            }
            Err(e) if e.is_timeout() => ProviderError::Timeout(config.timeout),
            Err(e) => ProviderError::Unavailable(e.to_string()),
        };
        if attempt >= config.max_retries {
            return Err(error);
        }
        tracing::debug!(attempt, %error, "retrying provider request");
        tokio::time::sleep(delay).await;
        delay *= 2;
        attempt += 1;
    }
}
