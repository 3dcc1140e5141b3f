//! Dataset characterization over catalog snapshots: instance and concept
//! counts per image, relative box sizes, coverage sampling and recall, and
//! per-concept average images.
//!
//! Images with no localizations land in bin 0 of the count histograms.

mod average;
mod counts;
mod coverage;
mod fetch;
mod histogram;

pub use average::*;
pub use counts::*;
pub use coverage::*;
pub use fetch::*;
pub use histogram::*;

use crate::taxonomy::{Rank, TaxonomyError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("snapshot contains no images")]
    EmptySnapshot,
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("histogram edges must be finite and strictly increasing")]
    InvalidEdges,
    #[error("no images annotated with {concept} or its descendants at rank {rank}")]
    NoCandidates { concept: String, rank: Rank },
    #[error("sample size must be positive")]
    InvalidSampleSize,
    #[error("image {image}: {message}")]
    Inconsistent { image: String, message: String },
    #[error("output size must be positive, got {width}x{height}")]
    InvalidSize { width: u32, height: u32 },
    #[error("none of the {skipped} images could be decoded")]
    NoDecodableImages { skipped: usize },
    #[error("failed to encode image: {0}")]
    Encode(String),
}
