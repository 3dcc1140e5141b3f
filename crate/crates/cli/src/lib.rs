//! The `fn` command line.
//!
//! [`run`] takes argv and the environment explicitly and returns the exit
//! code: 0 on success, 1 on validation errors, 2 on I/O errors. Errors are
//! written to the error stream as one JSON object.

mod config;
mod cost;
mod error;
mod eval;
mod ingest;
mod serve;
mod stats;
mod store;
mod taxonomy;

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{FileConfig, Flags, Settings};
pub use error::{CliError, Kind, EXIT_IO, EXIT_VALIDATION};

#[derive(Debug, Parser)]
#[command(name = "fn", version, about = "Taxonomy-aware marine imagery catalog")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML config file [env: FN_CONFIG]
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Journal file backing the catalog [env: FN_STORE]
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Taxonomy file, or http(s)://base#Root for a remote provider [env: FN_TAXONOMY]
    #[arg(long, global = true)]
    taxonomy: Option<String>,
    /// Listen address for `serve` [env: FN_BIND]
    #[arg(long, global = true)]
    bind: Option<String>,
    /// Bearer token for API writes [env: FN_TOKEN]
    #[arg(long, global = true)]
    token: Option<String>,
    /// error, warn, info, debug or trace [env: FN_LOG]
    #[arg(long, global = true)]
    log_level: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a collection CSV and its .meta sidecar, then store it
    Ingest(ingest::IngestArgs),
    /// Run the HTTP service
    Serve(serve::ServeArgs),
    /// Dataset statistics over the stored catalog
    #[command(subcommand)]
    Stats(stats::StatsCommand),
    /// Score detector output against expert annotations
    #[command(subcommand)]
    Eval(eval::EvalCommand),
    /// Annotation cost arithmetic
    Cost(cost::CostArgs),
    /// Inspect and check the concept tree
    Taxonomy(taxonomy::TaxonomyArgs),
}

/// Output streams for a command.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

pub fn run(argv: &[String], env: &HashMap<String, String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_VALIDATION
                }
            };
        }
    };
    let flags = Flags {
        config: cli.global.config,
        store: cli.global.store,
        taxonomy: cli.global.taxonomy,
        bind: cli.global.bind,
        token: cli.global.token,
        log_level: cli.global.log_level,
    };
    let mut io = Io { out, err };
    let result = Settings::resolve(&flags, env).and_then(|settings| {
        init_logging(&settings.log_level)?;
        match cli.command {
            Command::Ingest(a) => ingest::run(&settings, a, &mut io),
            Command::Serve(a) => serve::run(&settings, a, &mut io),
            Command::Stats(c) => stats::run(&settings, c, &mut io),
            Command::Eval(c) => eval::run(&settings, c, &mut io),
            Command::Cost(a) => cost::run(a, &mut io),
            Command::Taxonomy(a) => taxonomy::run(&settings, a, &mut io),
        }
    });
    let _ = io.out.flush();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.err, "{}", e.to_json());
            e.exit_code()
        }
    }
}

fn init_logging(level: &str) -> Result<(), CliError> {
    let level: tracing::Level = level
        .parse()
        .map_err(|_| CliError::validation(format!("unknown log level {level:?}")).field("log_level"))?;
    // a second call in the same process keeps the first subscriber
    let _ = tracing_subscriber::fmt().with_max_level(level).with_ansi(false).with_writer(std::io::stderr).try_init();
    Ok(())
}

/// Writes a JSON value followed by a newline.
fn print_json(io: &mut Io<'_>, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
    writeln!(io.out, "{text}")?;
    Ok(())
}
