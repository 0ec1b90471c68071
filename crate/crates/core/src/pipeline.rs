//! Sample → prompt → completion → parse → sanitize → translate.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{ChatProvider, ModelId};
use crate::prompt::{parse_reply, ChatExchange};
use crate::provider::ProviderError;
use crate::sampler::DatasetSample;
use crate::translate::{Language, LanguagePair, Translator};

pub const MIN_TAGS: u8 = 3;
pub const MAX_TAGS: u8 = 10;
pub const DEFAULT_TAGS: u8 = 5;
/// Longest tag, in characters, that survives sanitation.
pub const MAX_TAG_CHARS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("Count must be between {MIN_TAGS} and {MAX_TAGS}")]
pub struct CountOutOfRange(pub i64);

/// Requested number of tags, always within `MIN_TAGS..=MAX_TAGS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TagCount(u8);

impl TagCount {
    pub fn new(count: i64) -> Result<Self, CountOutOfRange> {
        if (i64::from(MIN_TAGS)..=i64::from(MAX_TAGS)).contains(&count) {
            Ok(Self(count as u8))
        } else {
            Err(CountOutOfRange(count))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl Default for TagCount {
    fn default() -> Self {
        Self(DEFAULT_TAGS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagWarning {
    OverGenerationTruncated,
    UnderGeneration,
    TagsSanitized,
    TranslationUnavailable,
}

impl TagWarning {
    pub fn code(self) -> &'static str {
        match self {
            TagWarning::OverGenerationTruncated => "over_generation_truncated",
            TagWarning::UnderGeneration => "under_generation",
            TagWarning::TagsSanitized => "tags_sanitized",
            TagWarning::TranslationUnavailable => "translation_unavailable",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TagRequest {
    pub sample: DatasetSample,
    pub count: TagCount,
    pub model: ModelId,
    pub dest_lang: Language,
}

impl TagRequest {
    pub fn new(sample: DatasetSample) -> Self {
        Self {
            sample,
            count: TagCount::default(),
            model: ModelId::default(),
            dest_lang: Language::ESTONIAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    pub english: Vec<String>,
    pub translated: Vec<String>,
    pub warnings: Vec<TagWarning>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaggingError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("model output contained no usable tags")]
    TaggingFailed,
}

/// Result of applying the sanitation and count rules to parsed pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub tags: Vec<String>,
    pub warnings: Vec<TagWarning>,
}

fn is_valid_tag(tag: &str) -> bool {
    !tag.is_empty() && !tag.contains(['\n', '\r']) && tag.chars().count() <= MAX_TAG_CHARS
}

/// Drops invalid and duplicate pieces, then enforces `count`.
pub fn normalize_tags(pieces: Vec<String>, count: TagCount) -> Normalized {
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    let before = pieces.len();
    let mut tags: Vec<String> = pieces
        .into_iter()
        .map(|p| p.trim().to_owned())
        .filter(|p| is_valid_tag(p))
        .filter(|p| seen.insert(p.to_lowercase()))
        .collect();
    if tags.len() < before {
        warnings.push(TagWarning::TagsSanitized);
    }
    let wanted = usize::from(count.get());
    if tags.len() > wanted {
        tags.truncate(wanted);
        warnings.push(TagWarning::OverGenerationTruncated);
    } else if !tags.is_empty() && tags.len() < wanted {
        warnings.push(TagWarning::UnderGeneration);
    }
    Normalized { tags, warnings }
}

pub async fn generate_tags(
    request: &TagRequest,
    llm: &dyn ChatProvider,
    translator: &dyn Translator,
) -> Result<TagSet, TaggingError> {
    let mut exchange = ChatExchange::new(&request.sample, request.count.get());
    let reply = llm.complete(&exchange, &request.model).await?;
    exchange.raw_reply = Some(reply);
    let pieces = parse_reply(exchange.raw_reply.as_deref().unwrap_or_default())
        .map_err(|_| TaggingError::TaggingFailed)?;

    let Normalized {
        tags: english,
        mut warnings,
    } = normalize_tags(pieces, request.count);
    if english.is_empty() {
        tracing::warn!(reply = ?exchange.raw_reply, "no usable tags in model reply");
        return Err(TaggingError::TaggingFailed);
    }

    let pair = LanguagePair {
        src: Language::ENGLISH,
        dest: request.dest_lang,
    };
    let translated = match translator.translate_all(&english, pair).await {
        Ok(t) if t.len() == english.len() => t,
        Ok(t) => {
            tracing::warn!(
                expected = english.len(),
                got = t.len(),
                "translation length mismatch"
            );
            warnings.push(TagWarning::TranslationUnavailable);
            Vec::new()
        }
        Err(e) => {
            tracing::warn!(error = %e, "translation failed, returning source-language tags only");
            warnings.push(TagWarning::TranslationUnavailable);
            Vec::new()
        }
    };

    Ok(TagSet {
        english,
        translated,
        warnings,
    })
}
