use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use clap::{Args, Subcommand};
use seacat_core::catalog::QueryFilter;
use seacat_core::stats::{
    average_image, concepts_per_image, coverage_candidates, coverage_recall, coverage_sample, instances_per_image,
    mean_instances_and_concepts, relative_size_distribution, target_concepts, AnnotationRef, ImageAnnotations,
    PixelFetcher, AVERAGE_SIZE, DEFAULT_SAMPLE_SIZE,
};
use seacat_core::taxonomy::Rank;
use serde::{Deserialize, Serialize};

use crate::config::Settings;
use crate::error::CliError;
use crate::{print_json, store, Io};

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Histogram of localizations per image
    Instances,
    /// Histogram of distinct concepts per image at a rank
    Concepts(RankArg),
    /// Mean localizations and mean distinct concepts per image
    Means(RankArg),
    /// Histogram of box area over image area
    Sizes {
        /// Print JSON instead of CSV
        #[arg(long)]
        json: bool,
    },
    /// Sample images for coverage review, or score a completed review
    Coverage(CoverageArgs),
    /// Pixel-wise mean of images
    Average(AverageArgs),
}

#[derive(Debug, Args)]
pub struct RankArg {
    /// kingdom, phylum, class, order, family, genus or species
    #[arg(long)]
    rank: String,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    concept: String,
    #[arg(long)]
    rank: String,
    /// Images to sample
    #[arg(long, default_value_t = DEFAULT_SAMPLE_SIZE)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Completed annotations as CSV with columns image,annotation,concept
    #[arg(long)]
    complete: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AverageArgs {
    /// Image paths or URLs; without any, images come from the store
    sources: Vec<String>,
    /// PNG to write
    #[arg(long)]
    out: PathBuf,
    /// Output width and height in pixels
    #[arg(long, default_value_t = AVERAGE_SIZE)]
    size: u32,
    /// Restrict store images to this concept
    #[arg(long)]
    concept: Option<String>,
    /// Include descendants of --concept
    #[arg(long)]
    descendants: bool,
    /// At most this many store images
    #[arg(long)]
    limit: Option<usize>,
    /// Cache directory for downloaded images
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    concurrency: usize,
}

pub fn parse_rank(s: &str) -> Result<Rank, CliError> {
    let r: Rank = s.parse().map_err(|e: seacat_core::taxonomy::UnknownRank| CliError::validation(e).field("rank"))?;
    if !r.is_ranked() {
        return Err(CliError::validation(format!("{s} is not a biological rank")).field("rank"));
    }
    Ok(r)
}

pub fn run(settings: &Settings, cmd: StatsCommand, io: &mut Io<'_>) -> Result<(), CliError> {
    let catalog = store::read_only(settings)?;
    match cmd {
        StatsCommand::Instances => {
            io.out.write_all(instances_per_image::<f64>(&catalog.snapshot())?.to_csv().as_bytes())?;
        }
        StatsCommand::Concepts(a) => {
            let h = concepts_per_image::<f64>(&catalog.snapshot(), &catalog.taxonomy(), parse_rank(&a.rank)?)?;
            io.out.write_all(h.to_csv().as_bytes())?;
        }
        StatsCommand::Means(a) => {
            let (inst, conc) =
                mean_instances_and_concepts::<f64>(&catalog.snapshot(), &catalog.taxonomy(), parse_rank(&a.rank)?)?;
            writeln!(io.out, "instances,concepts\n{inst},{conc}")?;
        }
        StatsCommand::Sizes { json } => {
            let d = relative_size_distribution::<f64>(&catalog.snapshot())?;
            if json {
                print_json(io, &d)?;
            } else {
                io.out.write_all(d.histogram.to_csv().as_bytes())?;
                if d.excluded > 0 {
                    tracing::warn!(excluded = d.excluded, "localizations on images without pixel dimensions");
                }
            }
        }
        StatsCommand::Coverage(a) => coverage(&catalog, a, io)?,
        StatsCommand::Average(a) => average(&catalog, a, io)?,
    }
    Ok(())
}

#[derive(Deserialize)]
struct CompletedRow {
    image: String,
    annotation: String,
    concept: String,
}

fn coverage(catalog: &seacat_core::catalog::Catalog, a: CoverageArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let rank = parse_rank(&a.rank)?;
    let tree = catalog.taxonomy();
    let snapshot = catalog.snapshot();
    let sample = coverage_sample(&snapshot, &tree, &a.concept, rank, a.n, a.seed)?;
    let Some(path) = a.complete else {
        writeln!(io.out, "image,image_url")?;
        for e in sample {
            writeln!(io.out, "{},{}", e.image.uuid, e.image.image_url)?;
        }
        return Ok(());
    };

    let mut completed: HashMap<String, Vec<AnnotationRef>> = HashMap::new();
    let mut reader = csv::Reader::from_path(&path).map_err(|e| csv_error(&path, e))?;
    for row in reader.deserialize::<CompletedRow>() {
        let row = row.map_err(|e| csv_error(&path, e))?;
        let concept = tree.name(tree.resolve(&row.concept)?).to_string();
        completed.entry(row.image).or_default().push(AnnotationRef::new(row.annotation, concept));
    }
    let images: Vec<ImageAnnotations> = sample
        .iter()
        .map(|e| {
            let image = e.image.uuid.to_string();
            ImageAnnotations {
                existing: e.localizations.iter().map(|l| AnnotationRef::new(l.uuid.to_string(), &l.concept)).collect(),
                complete: completed.remove(&image).unwrap_or_default(),
                image,
            }
        })
        .collect();
    if let Some(extra) = completed.keys().next() {
        return Err(CliError::validation(format!("image {extra} is not in the sample")).field("complete"));
    }
    let (target, _) = coverage_candidates(&snapshot, &tree, &a.concept, rank)?;
    let report = coverage_recall::<f64>(tree.name(target), rank, a.seed, &images, &target_concepts(&tree, target))?;
    writeln!(io.out, "image,existing_target,complete_target,existing_other,complete_other,recall_target,recall_other")?;
    for (id, c) in &report.images {
        writeln!(
            io.out,
            "{id},{},{},{},{},{},{}",
            c.existing_target,
            c.complete_target,
            c.existing_other,
            c.complete_other,
            c.recall_target::<f64>(),
            c.recall_other::<f64>()
        )?;
    }
    writeln!(io.out, "mean,,,,,{},{}", report.recall_target, report.recall_other)?;
    writeln!(io.out, "pooled,,,,,{},{}", report.pooled_recall_target, report.pooled_recall_other)?;
    Ok(())
}

fn csv_error(path: &std::path::Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        CliError::io(format!("{}: {e}", path.display()))
    } else {
        CliError::validation(format!("{}: {e}", path.display()))
    }
}

#[derive(Serialize)]
struct AverageSummary {
    out: PathBuf,
    width: u32,
    height: u32,
    averaged: usize,
    skipped: BTreeMap<String, String>,
}

fn average(catalog: &seacat_core::catalog::Catalog, a: AverageArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let mut urls = a.sources;
    if urls.is_empty() {
        let filter = QueryFilter {
            concept: a.concept,
            include_descendants: a.descendants,
            ..QueryFilter::default()
        };
        urls = catalog.query_all(&filter)?.into_iter().map(|e| e.image.image_url).collect();
    } else if a.concept.is_some() {
        return Err(CliError::validation("--concept selects store images and cannot be combined with sources").field("concept"));
    }
    if let Some(n) = a.limit {
        urls.truncate(n);
    }
    if urls.is_empty() {
        return Err(CliError::validation("no images to average"));
    }
    let fetcher = PixelFetcher::new(a.cache, a.concurrency);
    let mut sources = Vec::new();
    let mut skipped = BTreeMap::new();
    for (url, r) in urls.iter().zip(fetcher.fetch_all(&urls)) {
        match r {
            Ok(bytes) => sources.push((url.clone(), bytes)),
            Err(reason) => {
                tracing::warn!(%url, %reason, "skipping unreadable image");
                skipped.insert(url.clone(), reason);
            }
        }
    }
    if sources.is_empty() {
        return Err(CliError::io(format!("none of the {} images could be read", urls.len())));
    }
    let outcome = average_image(&sources, a.size, a.size)?;
    std::fs::write(&a.out, outcome.image.to_png()?)
        .map_err(|e| CliError::io(format!("{}: {e}", a.out.display())))?;
    skipped.extend(outcome.skipped);
    print_json(
        io,
        &AverageSummary { out: a.out, width: a.size, height: a.size, averaged: outcome.image.n, skipped },
    )
}
