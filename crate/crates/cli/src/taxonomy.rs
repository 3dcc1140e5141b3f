use std::path::PathBuf;

use clap::{Args, Subcommand};
use seacat_core::taxonomy::{record_for, supercategory_of, ConceptTree, SupercategoryMap};
use serde::Serialize;

use crate::config::Settings;
use crate::error::CliError;
use crate::stats::parse_rank;
use crate::{print_json, store, Io};

/// Without a subcommand, prints a summary of the configured tree.
#[derive(Debug, Args)]
pub struct TaxonomyArgs {
    #[command(subcommand)]
    command: Option<TaxonomyCommand>,
}

#[derive(Debug, Subcommand)]
enum TaxonomyCommand {
    /// One concept with its parent, children and aliases
    Show { name: String },
    /// A concept and everything below it, one name per line
    Descendants { name: String },
    /// The ancestor-or-self of a concept at a rank
    Label {
        name: String,
        #[arg(long)]
        rank: String,
    },
    /// Validate the tree, and optionally a supercategory map against it
    Check {
        /// Tab-separated label and root concepts
        #[arg(long)]
        supercategories: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Summary<'a> {
    concepts: usize,
    root: &'a str,
    generation: u64,
}

#[derive(Serialize)]
struct CheckReport {
    ok: bool,
    concepts: usize,
    supercategories: Option<Vec<Assignment>>,
}

#[derive(Serialize)]
struct Assignment {
    label: String,
    concepts: usize,
}

pub fn run(settings: &Settings, args: TaxonomyArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let tree = store::tree(settings)?;
    match args.command {
        None => print_json(
            io,
            &Summary { concepts: tree.len(), root: tree.name(tree.root()), generation: tree.generation() },
        ),
        Some(TaxonomyCommand::Show { name }) => print_json(io, &record_for(&tree, tree.resolve(&name)?)),
        Some(TaxonomyCommand::Descendants { name }) => {
            for d in tree.descendants(tree.resolve(&name)?) {
                writeln!(io.out, "{}", tree.name(d))?;
            }
            Ok(())
        }
        Some(TaxonomyCommand::Label { name, rank }) => {
            let label = tree.rank_label_name(tree.resolve(&name)?, parse_rank(&rank)?)?;
            writeln!(io.out, "{label}")?;
            Ok(())
        }
        Some(TaxonomyCommand::Check { supercategories }) => {
            let supercategories = supercategories.map(|p| assignments(&tree, &p)).transpose()?;
            print_json(io, &CheckReport { ok: true, concepts: tree.len(), supercategories })
        }
    }
}

fn assignments(tree: &ConceptTree, path: &std::path::Path) -> Result<Vec<Assignment>, CliError> {
    let map = SupercategoryMap::load_file(path)?.validate(tree)?;
    let mut out: Vec<Assignment> =
        map.labels().iter().map(|l| Assignment { label: l.clone(), concepts: 0 }).collect();
    for id in tree.ids() {
        if let Some(label) = supercategory_of(tree, &map, id)? {
            if let Some(a) = out.iter_mut().find(|a| a.label == label) {
                a.concepts += 1;
            }
        }
    }
    Ok(out)
}
