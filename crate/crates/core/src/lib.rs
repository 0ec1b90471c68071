//! Dataset auto-tagging: sample the head of a tabular file, ask a
//! chat-completion model for descriptive tags, normalize them and translate
//! them. Also audits how well an open-data portal's catalog is tagged.

pub mod api;
pub mod audit;
pub mod config;
pub mod llm;
pub mod pipeline;
pub mod prompt;
pub mod provider;
pub mod sampler;
pub mod translate;

pub use audit::{build_report, CoverageReport, TagHistogram};
pub use llm::{ChatProvider, ModelAllowlist, ModelId, OfflineProvider, OpenAiCompatible};
pub use pipeline::{generate_tags, TagCount, TagRequest, TagSet, TagWarning, TaggingError};
pub use prompt::{build_system_prompt, build_user_message, parse_reply, ChatExchange};
pub use provider::{ProviderConfig, ProviderError};
pub use sampler::{sample_csv, DatasetSample, SampleError};
pub use translate::{DeeplTranslator, IdentityTranslator, Language, LanguagePair, Translator};
