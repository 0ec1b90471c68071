//! Batch translation of tag lists.

use std::fmt;
use std::str::FromStr;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::{send_with_retry, ProviderConfig, ProviderError};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid language code {0:?}: expected two lowercase ASCII letters")]
pub struct InvalidLanguage(pub String);

/// ISO 639-1 code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Language([u8; 2]);

impl Language {
    pub const ENGLISH: Language = Language(*b"en");
    pub const ESTONIAN: Language = Language(*b"et");

    pub fn as_str(&self) -> &str {
        // only ever constructed from ASCII letters
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl FromStr for Language {
    type Err = InvalidLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.as_bytes() {
            [a, b] if a.is_ascii_lowercase() && b.is_ascii_lowercase() => Ok(Language([*a, *b])),
            _ => Err(InvalidLanguage(s.to_owned())),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguagePair {
    pub src: Language,
    pub dest: Language,
}

impl Default for LanguagePair {
    fn default() -> Self {
        Self {
            src: Language::ENGLISH,
            dest: Language::ESTONIAN,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("nothing to translate")]
    EmptyInput,
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[async_trait]
pub trait Translator: Send + Sync {
    /// Output is positionally aligned with `tags`.
    async fn translate_all(
        &self,
        tags: &[String],
        pair: LanguagePair,
    ) -> Result<Vec<String>, TranslateError>;
}

fn check_input(tags: &[String]) -> Result<(), TranslateError> {
    if tags.is_empty() || tags.iter().any(String::is_empty) {
        return Err(TranslateError::EmptyInput);
    }
    Ok(())
}

#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityTranslator;

#[async_trait]
impl Translator for IdentityTranslator {
    async fn translate_all(
        &self,
        tags: &[String],
        _pair: LanguagePair,
    ) -> Result<Vec<String>, TranslateError> {
        check_input(tags)?;
        Ok(tags.to_vec())
    }
}

#[derive(Debug, Serialize)]
struct TranslateRequest<'a> {
    text: &'a [String],
    source_lang: String,
    target_lang: String,
}

#[derive(Debug, Deserialize)]
struct TranslateResponse {
    translations: Vec<Translation>,
}

#[derive(Debug, Deserialize)]
struct Translation {
    text: String,
}

/// Client for a DeepL-compatible `POST {base_url}/v2/translate`.
#[derive(Debug)]
pub struct DeeplTranslator {
    client: reqwest::Client,
    config: ProviderConfig,
}

impl DeeplTranslator {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        Ok(Self {
            client: config.http_client()?,
            config,
        })
    }
}

#[async_trait]
impl Translator for DeeplTranslator {
    async fn translate_all(
        &self,
        tags: &[String],
        pair: LanguagePair,
    ) -> Result<Vec<String>, TranslateError> {
        check_input(tags)?;
        let body = TranslateRequest {
            text: tags,
            source_lang: pair.src.as_str().to_ascii_uppercase(),
            target_lang: pair.dest.as_str().to_ascii_uppercase(),
        };
        let url = self.config.endpoint("v2/translate");
        let auth = format!("DeepL-Auth-Key {}", self.config.api_key);
        let resp = send_with_retry(&self.config, || {
            self.client
                .post(&url)
                .header(reqwest::header::AUTHORIZATION, &auth)
                .json(&body)
                .send()
        })
        .await?;
        let parsed: TranslateResponse = resp
            .json()
            .await
            .map_err(|e| ProviderError::Unavailable(format!("malformed translation body: {e}")))?;
        if parsed.translations.len() != tags.len() {
            return Err(ProviderError::LengthMismatch {
                expected: tags.len(),
                got: parsed.translations.len(),
            }
            .into());
        }
        Ok(parsed.translations.into_iter().map(|t| t.text).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn language_codes() {
        assert_eq!("et".parse::<Language>().unwrap(), Language::ESTONIAN);
        assert!("EN".parse::<Language>().is_err());
        assert!("eng".parse::<Language>().is_err());
        assert!("é".parse::<Language>().is_err());
        assert_eq!(LanguagePair::default().dest.to_string(), "et");
    }

    #[tokio::test]
    async fn identity_is_identity() {
        let tags = vec!["population".to_string(), "county".to_string()];
        let out = IdentityTranslator
            .translate_all(&tags, LanguagePair::default())
            .await
            .unwrap();
        assert_eq!(out, tags);
    }

    #[tokio::test]
    async fn empty_input_rejected() {
        let err = IdentityTranslator
            .translate_all(&[], LanguagePair::default())
            .await;
        assert_eq!(err, Err(TranslateError::EmptyInput));
        let err = IdentityTranslator
            .translate_all(&[String::new()], LanguagePair::default())
            .await;
        assert_eq!(err, Err(TranslateError::EmptyInput));
    }
}
