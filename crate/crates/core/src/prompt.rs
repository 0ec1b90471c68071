//! Message construction and reply parsing for tag generation.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampler::DatasetSample;

/// Split pattern for model replies: a comma with at most one whitespace
/// character on either side.
static TAG_SEPARATOR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s?,\s?").unwrap());

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("model reply contains no tags")]
    UnparseableReply,
}

/// The two messages sent to the model and, once received, its reply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub system_message: String,
    pub user_message: String,
    pub raw_reply: Option<String>,
}

impl ChatExchange {
    pub fn new(sample: &DatasetSample, count: u8) -> Self {
        Self {
            system_message: build_system_prompt(count),
            user_message: build_user_message(sample),
            raw_reply: None,
        }
    }
}

pub fn build_system_prompt(count: u8) -> String {
    format!(
        "You will generate tags for a dataset. I will provide you the first rows \
         of the dataset, whereas the very first row will be the column titles of the dataset. \
         The first row will be in the following form: title1,title2,title3,etc... \
         The next rows will be in the following form: value1,value2,value3,etc... \
         Output {count} tags that describe the dataset best. Output only the \
         suitable tags in the form of: tag1,tag2,tag3,etc... Tags should be in English. \
         Try to make the tags general but relevant. Output only {count} tags."
    )
}

/// Each row joined by `,` and terminated by `\n`. Cells are not quoted.
pub fn build_user_message(sample: &DatasetSample) -> String {
    let mut message = String::new();
    for row in sample.rows() {
        message.push_str(&row.join(","));
        message.push('\n');
    }
    message
}

pub fn parse_reply(raw_reply: &str) -> Result<Vec<String>, ParseError> {
    let tags: Vec<String> = TAG_SEPARATOR
        .split(raw_reply)
        .map(str::trim)
        .filter(|piece| !piece.is_empty())
        .map(str::to_owned)
        .collect();
    if tags.is_empty() {
        return Err(ParseError::UnparseableReply);
    }
    Ok(tags)
}
