//! Opening the catalog for commands.

use seacat_core::catalog::{read_journal, Catalog, FileStore, MemoryStore};
use seacat_core::taxonomy::{ConceptTree, SharedTaxonomy};

use crate::config::Settings;
use crate::error::CliError;

pub fn tree(settings: &Settings) -> Result<ConceptTree, CliError> {
    Ok(seacat_api::load_tree(settings.taxonomy()?)?)
}

/// The stored catalog held in memory; the journal file is only read. With
/// no store configured this is an empty catalog.
pub fn read_only(settings: &Settings) -> Result<Catalog, CliError> {
    let tree = tree(settings)?;
    let log = match &settings.store {
        Some(p) => read_journal(p)?,
        None => Vec::new(),
    };
    Ok(Catalog::open(Box::new(MemoryStore::from_log(log)), SharedTaxonomy::new(tree))?)
}

pub fn writable(settings: &Settings) -> Result<Catalog, CliError> {
    let tree = tree(settings)?;
    let store = FileStore::open(settings.store()?)?;
    Ok(Catalog::open(Box::new(store), SharedTaxonomy::new(tree))?)
}
