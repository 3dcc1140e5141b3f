use std::path::{Path, PathBuf};

use clap::Args;
use seacat_core::ingest::{parse_collection_csv, IngestReport};
use serde::Serialize;
use uuid::Uuid;

use crate::config::Settings;
use crate::error::CliError;
use crate::{print_json, store, Io};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Collection CSV
    csv: PathBuf,
    /// Collection metadata; defaults to the CSV path with a .meta extension
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Validate against the store without writing
    #[arg(long)]
    dry_run: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    dry_run: bool,
    stored: bool,
    collection: Uuid,
    created: Option<bool>,
    images: usize,
    localizations: usize,
    report: &'a IngestReport,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn run(settings: &Settings, args: IngestArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let meta_path = args.meta.clone().unwrap_or_else(|| args.csv.with_extension("meta"));
    let csv = read(&args.csv)?;
    let meta = String::from_utf8(read(&meta_path)?)
        .map_err(|_| CliError::validation(format!("{}: not valid UTF-8", meta_path.display())).field("meta"))?;
    let parsed = parse_collection_csv(&meta, &csv)?;
    let report = parsed.report;
    if !report.is_clean() {
        let errors = serde_json::to_value(&report.errors).map_err(CliError::io)?;
        return Err(CliError::validation(format!(
            "{} of {} rows rejected; nothing was stored",
            report.error_rows(),
            report.rows_read
        ))
        .details(errors));
    }
    let id = parsed.collection.uuid;
    let summary = if args.dry_run {
        let catalog = store::read_only(settings)?;
        let created = catalog.collection(id).is_none();
        let (images, localizations) = catalog.validate_ingest(&parsed.collection, parsed.images)?;
        Summary { dry_run: true, stored: false, collection: id, created: Some(created), images, localizations, report: &report }
    } else {
        let catalog = store::writable(settings)?;
        let o = catalog.ingest(parsed.collection, parsed.images)?;
        Summary {
            dry_run: false,
            stored: true,
            collection: o.collection,
            created: Some(o.created),
            images: o.images,
            localizations: o.localizations,
            report: &report,
        }
    };
    print_json(io, &summary)
}
