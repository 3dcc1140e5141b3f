use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use seacat_api::{serve_catalog, EventSink, FileSink, NullSink, StartupError, StdoutSink};

use crate::config::Settings;
use crate::error::CliError;
use crate::{store, Io};

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Where mutation events go: stdout, none, or a file path
    #[arg(long, default_value = "stdout")]
    events: String,
}

fn sink(spec: &str) -> Result<Arc<dyn EventSink>, CliError> {
    Ok(match spec {
        "stdout" => Arc::new(StdoutSink),
        "none" => Arc::new(NullSink),
        path => Arc::new(
            FileSink::open(PathBuf::from(path)).map_err(|e| CliError::io(format!("event file {path}: {e}")))?,
        ),
    })
}

pub fn run(settings: &Settings, args: ServeArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let catalog = Arc::new(store::writable(settings)?);
    let events = sink(&args.events)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let server = serve_catalog(&settings.bind, catalog, events, settings.token.clone())
            .await
            .map_err(|e| match e {
                StartupError::Config(_) | StartupError::Taxonomy(_) => CliError::validation(e),
                _ => CliError::io(e),
            })?;
        writeln!(io.out, "listening on http://{}", server.addr())?;
        io.out.flush()?;
        tokio::signal::ctrl_c().await?;
        server.shutdown().await?;
        Ok(())
    })
}
