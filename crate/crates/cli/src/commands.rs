use std::fs::File;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use tagify_core::api::{router, ApiState, CorsPolicy};
use tagify_core::audit::{run_audit, AuditOptions, PortalClient};
use tagify_core::config::AppConfig;
use tagify_core::pipeline::{generate_tags, TagCount, TagRequest, TagSet};
use tagify_core::sampler::{sample_csv, DEFAULT_SAMPLE_ROWS};
use tagify_core::{ModelAllowlist, TaggingError};

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

pub async fn cmd_serve(config: &AppConfig, dev_cors: bool) -> Result<(), Failure> {
    let state = Arc::new(ApiState {
        llm: config
            .chat_provider()
            .map_err(|e| Failure::runtime(e.to_string()))?,
        translator: config
            .translator()
            .map_err(|e| Failure::runtime(e.to_string()))?,
        models: ModelAllowlist::default(),
        dest_lang: config.dest_lang,
    });
    let cors = if dev_cors {
        CorsPolicy::Any
    } else {
        match &config.frontend_url {
            Some(url) => {
                let origin = url.origin().ascii_serialization();
                CorsPolicy::Origin(
                    origin
                        .parse()
                        .map_err(|_| Failure::usage(format!("bad frontend URL {url}")))?,
                )
            }
            None => CorsPolicy::Disabled,
        }
    };
    let addr = SocketAddr::from(([0, 0, 0, 0], config.listen_port));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| {
        if e.kind() == io::ErrorKind::AddrInUse {
            Failure::runtime(format!("port {} is already in use", config.listen_port))
        } else {
            Failure::runtime(format!("cannot listen on {addr}: {e}"))
        }
    })?;
    tracing::info!(%addr, mode = ?config.provider_mode, "listening");
    axum::serve(listener, router(state, cors))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        })
        .await
        .map_err(|e| Failure::runtime(e.to_string()))
}

pub struct TagArgs {
    pub file: PathBuf,
    pub count: u8,
    pub model: String,
    pub delimiter: char,
    pub format: OutputFormat,
}

pub async fn cmd_tag(
    config: &AppConfig,
    args: &TagArgs,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let count = TagCount::new(i64::from(args.count)).map_err(|e| Failure::usage(e.to_string()))?;
    let model = ModelAllowlist::default()
        .resolve(&args.model)
        .map_err(|e| Failure::usage(e.message))?;
    let file = open(&args.file)?;
    let source = args.file.display().to_string();
    let sample = sample_csv(file, args.delimiter, DEFAULT_SAMPLE_ROWS, source)
        .map_err(|e| Failure::runtime(format!("{}: {e}", args.file.display())))?;

    let llm = config
        .chat_provider()
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let translator = config
        .translator()
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let request = TagRequest {
        sample,
        count,
        model,
        dest_lang: config.dest_lang,
    };
    let tags = generate_tags(&request, llm.as_ref(), translator.as_ref())
        .await
        .map_err(|e| match e {
            TaggingError::TaggingFailed => {
                Failure::runtime("tagging failed: model output contained no usable tags")
            }
            TaggingError::Provider(p) => Failure::runtime(p.to_string()),
        })?;
    for w in &tags.warnings {
        tracing::warn!(warning = w.code(), "tag generation warning");
    }
    write_tags(&tags, args.format, out).map_err(|e| Failure::runtime(e.to_string()))
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Failure::usage(format!("file not found: {}", path.display())),
        _ => Failure::runtime(format!("{}: {e}", path.display())),
    })
}

fn write_tags(tags: &TagSet, format: OutputFormat, out: &mut impl Write) -> io::Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, tags)?;
            writeln!(out)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["english", "translated"])?;
            for (i, english) in tags.english.iter().enumerate() {
                let translated = tags.translated.get(i).map(String::as_str).unwrap_or("");
                w.write_record([english.as_str(), translated])?;
            }
            w.flush()
        }
    }
}

pub struct AuditArgs {
    pub limit: usize,
    pub out: PathBuf,
    pub csv: Option<PathBuf>,
    pub concurrency: usize,
    pub delay: Duration,
}

pub async fn cmd_audit(
    config: &AppConfig,
    args: &AuditArgs,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let client = PortalClient::new(config.portal_base_url.clone(), Duration::from_secs(30))
        .map_err(|e| Failure::runtime(e.to_string()))?;
    let options = AuditOptions {
        limit: args.limit,
        concurrency: args.concurrency,
        delay: args.delay,
    };
    let report = run_audit(&client, &options)
        .await
        .map_err(|e| Failure::runtime(e.to_string()))?;

    let json = serde_json::to_vec_pretty(&report).map_err(|e| Failure::runtime(e.to_string()))?;
    std::fs::write(&args.out, json)
        .map_err(|e| Failure::runtime(format!("{}: {e}", args.out.display())))?;
    if let Some(path) = &args.csv {
        std::fs::write(path, report.histogram.to_csv())
            .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    }
    for err in &report.errors_encountered {
        tracing::warn!(id = %err.id, error = %err.error, "dataset fetch failed");
    }
    writeln!(out, "{}", report.headline()).map_err(|e| Failure::runtime(e.to_string()))?;
    if !report.errors_encountered.is_empty() {
        writeln!(
            out,
            "{} dataset(s) could not be fetched; see {}",
            report.errors_encountered.len(),
            args.out.display()
        )
        .map_err(|e| Failure::runtime(e.to_string()))?;
    }
    Ok(())
}
