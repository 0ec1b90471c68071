//! Chat-completion providers.
//!
//! [`OpenAiCompatible`] speaks the `/chat/completions` wire protocol and works
//! against any server implementing it. [`OfflineProvider`] derives a reply
//! from the dataset header alone, so the whole pipeline can run without
//! network access and with fully predictable output.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::LazyLock;

use async_trait::async_trait;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::ChatExchange;
use crate::provider::{send_with_retry, ProviderConfig, ProviderError};

pub const DEFAULT_MODELS: [&str; 2] = ["gpt-3.5-turbo", "gpt-4"];
pub const DEFAULT_MODEL: &str = "gpt-3.5-turbo";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{message}")]
pub struct UnknownModel {
    pub message: String,
}

/// The set of model names a deployment accepts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelAllowlist(Vec<String>);

impl ModelAllowlist {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(names.into_iter().map(Into::into).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    /// Human-readable rejection text, e.g. "Model must be gpt-3.5-turbo or gpt-4".
    pub fn rejection_message(&self) -> String {
        let names = &self.0;
        let list = match names.len() {
            0 => "one of the configured models".to_owned(),
            1 => names[0].clone(),
            n => format!("{} or {}", names[..n - 1].join(", "), names[n - 1]),
        };
        format!("Model must be {list}")
    }

    pub fn resolve(&self, name: &str) -> Result<ModelId, UnknownModel> {
        if self.0.iter().any(|m| m == name) {
            Ok(ModelId(name.to_owned()))
        } else {
            Err(UnknownModel {
                message: self.rejection_message(),
            })
        }
    }
}

impl Default for ModelAllowlist {
    fn default() -> Self {
        Self::new(DEFAULT_MODELS)
    }
}

/// A model name that passed allowlist validation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ModelId(String);

impl ModelId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Default for ModelId {
    fn default() -> Self {
        Self(DEFAULT_MODEL.to_owned())
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[async_trait]
pub trait ChatProvider: Send + Sync {
    /// Returns the assistant content of the first choice.
    async fn complete(
        &self,
        exchange: &ChatExchange,
        model: &ModelId,
    ) -> Result<String, ProviderError>;
}

#[derive(Debug, Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    temperature: f32,
    messages: [WireMessage<'a>; 2],
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

/// Client for `POST {base_url}/chat/completions`.
#[derive(Debug)]
pub struct OpenAiCompatible {
    client: reqwest::Client,
    config: ProviderConfig,
}

impl OpenAiCompatible {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        Ok(Self {
            client: config.http_client()?,
            config,
        })
    }
}

#[async_trait]
impl ChatProvider for OpenAiCompatible {
    async fn complete(
        &self,
        exchange: &ChatExchange,
        model: &ModelId,
    ) -> Result<String, ProviderError> {
        let body = CompletionRequest {
            model: model.as_str(),
            temperature: self.config.temperature,
            messages: [
                WireMessage {
                    role: "system",
                    content: &exchange.system_message,
                },
                WireMessage {
                    role: "user",
                    content: &exchange.user_message,
                },
            ],
        };
        let url = self.config.endpoint("chat/completions");
        let resp = send_with_retry(&self.config, || {
            self.client
                .post(&url)
                .bearer_auth(&self.config.api_key)
                .json(&body)
                .send()
        })
        .await?;
        let parsed: CompletionResponse = resp
            .json()
            .await
            .map_err(|e| ProviderError::Unavailable(format!("malformed completion body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .filter(|content| !content.trim().is_empty())
            .ok_or(ProviderError::EmptyCompletion)
    }
}

static COUNT_IN_PROMPT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"Output only (\d+) tags\.").unwrap());

/// Deterministic stand-in for a model.
///
/// Replies with the first `count` header cells, trimmed and lowercased,
/// joined by commas. When the header is shorter than `count` it cycles,
/// suffixing `-2`, `-3`, ... on each further pass. `count` is read back from
/// the system prompt.
#[derive(Debug, Default)]
pub struct OfflineProvider {
    calls: AtomicUsize,
}

impl OfflineProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reply_for(exchange: &ChatExchange) -> Result<String, ProviderError> {
        let count: usize = COUNT_IN_PROMPT
            .captures(&exchange.system_message)
            .and_then(|c| c[1].parse().ok())
            .ok_or_else(|| ProviderError::Rejected {
                status: 400,
                body: "no tag count found in system message".into(),
            })?;
        let header = exchange.user_message.lines().next().unwrap_or_default();
        let cells: Vec<String> = header
            .split(',')
            .map(|c| c.trim().to_lowercase())
            .filter(|c| !c.is_empty())
            .collect();
        if cells.is_empty() {
            return Err(ProviderError::EmptyCompletion);
        }
        let tags: Vec<String> = (0..count)
            .map(|i| {
                let cell = &cells[i % cells.len()];
                match i / cells.len() {
                    0 => cell.clone(),
                    pass => format!("{cell}-{}", pass + 1),
                }
            })
            .collect();
        Ok(tags.join(","))
    }
}

#[async_trait]
impl ChatProvider for OfflineProvider {
    async fn complete(
        &self,
        exchange: &ChatExchange,
        _model: &ModelId,
    ) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Self::reply_for(exchange)
    }
}

/// Replies with a fixed string regardless of input. Useful for exercising
/// the normalization rules against specific model misbehaviour.
#[derive(Debug, Clone)]
pub struct ScriptedProvider {
    reply: Result<String, ProviderError>,
}

impl ScriptedProvider {
    pub fn replying(reply: impl Into<String>) -> Self {
        Self {
            reply: Ok(reply.into()),
        }
    }

    pub fn failing(error: ProviderError) -> Self {
        Self { reply: Err(error) }
    }
}

#[async_trait]
impl ChatProvider for ScriptedProvider {
    async fn complete(
        &self,
        _exchange: &ChatExchange,
        _model: &ModelId,
    ) -> Result<String, ProviderError> {
        self.reply.clone()
    }
}
