mod commands;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use tagify_core::config::{load_config, ConfigFlags};
use tagify_core::llm::DEFAULT_MODEL;
use tagify_core::pipeline::{DEFAULT_TAGS, MAX_TAGS, MIN_TAGS};
use tracing_subscriber::EnvFilter;

use commands::{AuditArgs, Failure, OutputFormat, TagArgs};

/// Generate descriptive tags for tabular datasets, or audit a portal's tag coverage.
#[derive(Debug, Parser)]
#[command(name = "tagify", version)]
struct Cli {
    /// Use the deterministic offline model and identity translator (no API keys, no network).
    #[arg(long, global = true)]
    offline: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<i64>,
        /// Allow any CORS origin (local development only).
        #[arg(long)]
        dev_cors: bool,
    },
    /// Tag a local CSV file and print the result.
    Tag {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TAGS, value_parser = clap::value_parser!(u8).range(i64::from(MIN_TAGS)..=i64::from(MAX_TAGS)))]
        count: u8,
        #[arg(long, default_value = DEFAULT_MODEL)]
        model: String,
        #[arg(long)]
        dest_lang: Option<String>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long, default_value_t = ',')]
        delimiter: char,
    },
    /// Count tags per dataset across a portal catalog.
    Audit {
        /// Portal base URL (overrides TAGIFY_PORTAL_BASE_URL).
        #[arg(long)]
        base_url: Option<String>,
        #[arg(long, default_value_t = 1787)]
        limit: usize,
        /// Where to write the JSON report.
        #[arg(long, default_value = "audit_report.json")]
        out: PathBuf,
        /// Also write the histogram as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Maximum detail requests in flight.
        #[arg(long, default_value_t = 1)]
        concurrency: usize,
        /// Pause before each detail request, in milliseconds.
        #[arg(long, default_value_t = 0)]
        delay_ms: u64,
    },
}

impl Command {
    fn config_flags(&self, offline: bool) -> ConfigFlags {
        let mut flags = ConfigFlags {
            offline,
            ..ConfigFlags::default()
        };
        match self {
            Command::Serve { port, .. } => {
                flags.port = *port;
                flags.needs_providers = true;
            }
            Command::Tag { dest_lang, .. } => {
                flags.dest_lang = dest_lang.clone();
                flags.needs_providers = true;
            }
            Command::Audit { base_url, .. } => flags.portal_base_url = base_url.clone(),
        }
        flags
    }
}

async fn run(cli: Cli) -> Result<(), Failure> {
    let env: HashMap<String, String> = std::env::vars().collect();
    let config = load_config(&env, &cli.command.config_flags(cli.offline))
        .map_err(|e| Failure::usage(e.to_string()))?;
    tracing::debug!(?config, "configuration loaded");
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Serve { dev_cors, .. } => commands::cmd_serve(&config, dev_cors).await,
        Command::Tag {
            file,
            count,
            model,
            format,
            delimiter,
            ..
        } => {
            let args = TagArgs {
                file,
                count,
                model,
                delimiter,
                format,
            };
            commands::cmd_tag(&config, &args, &mut stdout).await
        }
        Command::Audit {
            limit,
            out,
            csv,
            concurrency,
            delay_ms,
            ..
        } => {
            let args = AuditArgs {
                limit,
                out,
                csv,
                concurrency,
                delay: Duration::from_millis(delay_ms),
            };
            commands::cmd_audit(&config, &args, &mut stdout).await
        }
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
