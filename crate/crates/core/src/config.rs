//! Application configuration.
//!
//! Precedence for every setting: command-line flag, then `TAGIFY_*`
//! environment variable, then legacy alias variable, then built-in default.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;
use url::Url;

use crate::llm::{ChatProvider, OfflineProvider, OpenAiCompatible};
use crate::provider::{ProviderConfig, ProviderError};
use crate::translate::{DeeplTranslator, IdentityTranslator, Language, Translator};

pub const DEFAULT_PORT: u16 = 8000;
pub const DEFAULT_LLM_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_TRANSLATOR_BASE_URL: &str = "https://api-free.deepl.com";
pub const DEFAULT_PORTAL_BASE_URL: &str = "https://avaandmed.eesti.ee";

struct Var {
    name: &'static str,
    aliases: &'static [&'static str],
}

const PROVIDER_MODE: Var = Var {
    name: "TAGIFY_PROVIDER_MODE",
    aliases: &[],
};
const FRONTEND_URL: Var = Var {
    name: "TAGIFY_FRONTEND_URL",
    aliases: &["FRONTEND_URL", "frontend_url"],
};
const LLM_API_KEY: Var = Var {
    name: "TAGIFY_LLM_API_KEY",
    aliases: &["CHATGPT_API_KEY", "chatgpt_api_key"],
};
const LLM_BASE_URL: Var = Var {
    name: "TAGIFY_LLM_BASE_URL",
    aliases: &[],
};
const TRANSLATOR_API_KEY: Var = Var {
    name: "TAGIFY_TRANSLATOR_API_KEY",
    aliases: &["DEEPL_AUTH_KEY", "deepl_auth_key"],
};
const TRANSLATOR_BASE_URL: Var = Var {
    name: "TAGIFY_TRANSLATOR_BASE_URL",
    aliases: &[],
};
const PORTAL_BASE_URL: Var = Var {
    name: "TAGIFY_PORTAL_BASE_URL",
    aliases: &[],
};
const PORT: Var = Var {
    name: "TAGIFY_PORT",
    aliases: &[],
};
const DEST_LANG: Var = Var {
    name: "TAGIFY_DEST_LANG",
    aliases: &[],
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderMode {
    Remote,
    Offline,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.problems.join("; "))
    }
}

/// Values supplied on the command line; `None` defers to the environment.
#[derive(Debug, Clone, Default)]
pub struct ConfigFlags {
    pub port: Option<i64>,
    pub offline: bool,
    pub portal_base_url: Option<String>,
    pub dest_lang: Option<String>,
    /// Whether the command builds model/translation providers (and so needs keys in remote mode).
    pub needs_providers: bool,
}

#[derive(Clone)]
pub struct AppConfig {
    pub frontend_url: Option<Url>,
    pub llm_api_key: Option<String>,
    pub llm_base_url: Url,
    pub translator_api_key: Option<String>,
    pub translator_base_url: Url,
    pub portal_base_url: Url,
    pub listen_port: u16,
    pub provider_mode: ProviderMode,
    pub dest_lang: Language,
}

impl fmt::Debug for AppConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AppConfig")
            .field("frontend_url", &self.frontend_url.as_ref().map(Url::as_str))
            .field("has_llm_api_key", &self.llm_api_key.is_some())
            .field("llm_base_url", &self.llm_base_url.as_str())
            .field("has_translator_api_key", &self.translator_api_key.is_some())
            .field("translator_base_url", &self.translator_base_url.as_str())
            .field("portal_base_url", &self.portal_base_url.as_str())
            .field("listen_port", &self.listen_port)
            .field("provider_mode", &self.provider_mode)
            .field("dest_lang", &self.dest_lang)
            .finish()
    }
}

struct Lookup<'a> {
    env: &'a HashMap<String, String>,
    problems: Vec<String>,
}

impl Lookup<'_> {
    fn get(&self, var: &Var) -> Option<String> {
        std::iter::once(var.name)
            .chain(var.aliases.iter().copied())
            .find_map(|name| self.env.get(name).filter(|v| !v.trim().is_empty()).cloned())
    }

    fn url(&mut self, flag: Option<&str>, var: &Var, default: Option<&str>) -> Option<Url> {
        let raw = flag
            .map(str::to_owned)
            .or_else(|| self.get(var))
            .or(default.map(str::to_owned))?;
        match Url::parse(&raw) {
            Ok(url) => Some(url),
            Err(e) => {
                self.problems
                    .push(format!("{} is not a valid URL ({raw:?}: {e})", var.name));
                None
            }
        }
    }
}

/// Reads configuration from `env` (normally `std::env::vars()`) and `flags`,
/// reporting every missing or invalid entry at once.
pub fn load_config(
    env: &HashMap<String, String>,
    flags: &ConfigFlags,
) -> Result<AppConfig, ConfigError> {
    let mut lookup = Lookup {
        env,
        problems: Vec::new(),
    };

    let provider_mode = if flags.offline {
        ProviderMode::Offline
    } else {
        match lookup
            .get(&PROVIDER_MODE)
            .as_deref()
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            None | Some("remote") => ProviderMode::Remote,
            Some("offline") => ProviderMode::Offline,
            Some(other) => {
                lookup.problems.push(format!(
                    "{} must be \"remote\" or \"offline\", got {other:?}",
                    PROVIDER_MODE.name
                ));
                ProviderMode::Remote
            }
        }
    };

    let frontend_url = lookup.url(None, &FRONTEND_URL, None);
    let llm_base_url = lookup.url(None, &LLM_BASE_URL, Some(DEFAULT_LLM_BASE_URL));
    let translator_base_url = lookup.url(
        None,
        &TRANSLATOR_BASE_URL,
        Some(DEFAULT_TRANSLATOR_BASE_URL),
    );
    let portal_base_url = lookup.url(
        flags.portal_base_url.as_deref(),
        &PORTAL_BASE_URL,
        Some(DEFAULT_PORTAL_BASE_URL),
    );

    let llm_api_key = lookup.get(&LLM_API_KEY);
    let translator_api_key = lookup.get(&TRANSLATOR_API_KEY);
    if provider_mode == ProviderMode::Remote && flags.needs_providers {
        if llm_api_key.is_none() {
            lookup.problems.push(format!(
                "{} is not set (legacy: CHATGPT_API_KEY)",
                LLM_API_KEY.name
            ));
        }
        if translator_api_key.is_none() {
            lookup.problems.push(format!(
                "{} is not set (legacy: DEEPL_AUTH_KEY)",
                TRANSLATOR_API_KEY.name
            ));
        }
    }

    let port_raw = flags
        .port
        .map(|p| p.to_string())
        .or_else(|| lookup.get(&PORT));
    let listen_port = match port_raw {
        None => DEFAULT_PORT,
        Some(raw) => match raw.trim().parse::<u16>() {
            Ok(p) if p >= 1 => p,
            _ => {
                lookup.problems.push(format!(
                    "{} must be an integer in 1..=65535, got {raw:?}",
                    PORT.name
                ));
                DEFAULT_PORT
            }
        },
    };

    let dest_raw = flags.dest_lang.clone().or_else(|| lookup.get(&DEST_LANG));
    let dest_lang = match dest_raw {
        None => Language::ESTONIAN,
        Some(raw) => raw.parse().unwrap_or_else(|e| {
            lookup.problems.push(format!("{}: {e}", DEST_LANG.name));
            Language::ESTONIAN
        }),
    };

    if !lookup.problems.is_empty() {
        return Err(ConfigError {
            problems: lookup.problems,
        });
    }
    Ok(AppConfig {
        frontend_url,
        llm_api_key,
        // defaults always parse, so these are present whenever no problem was recorded
        llm_base_url: llm_base_url.expect("default URL"),
        translator_api_key,
        translator_base_url: translator_base_url.expect("default URL"),
        portal_base_url: portal_base_url.expect("default URL"),
        listen_port,
        provider_mode,
        dest_lang,
    })
}

impl AppConfig {
    pub fn chat_provider(&self) -> Result<Arc<dyn ChatProvider>, ProviderError> {
        Ok(match self.provider_mode {
            ProviderMode::Offline => Arc::new(OfflineProvider::new()),
            ProviderMode::Remote => Arc::new(OpenAiCompatible::new(ProviderConfig::new(
                self.llm_base_url.clone(),
                self.llm_api_key.clone().unwrap_or_default(),
            ))?),
        })
    }

    pub fn translator(&self) -> Result<Arc<dyn Translator>, ProviderError> {
        Ok(match self.provider_mode {
            ProviderMode::Offline => Arc::new(IdentityTranslator),
            ProviderMode::Remote => Arc::new(DeeplTranslator::new(ProviderConfig::new(
                self.translator_base_url.clone(),
                self.translator_api_key.clone().unwrap_or_default(),
            ))?),
        })
    }
}
