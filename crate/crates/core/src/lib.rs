//! Taxonomy-aware catalog of localized marine imagery, with dataset
//! statistics, detector evaluation and annotation cost estimates.
//!
//! The numeric kernels are generic over [`Scalar`]; the aliases below fix
//! them to `f64`, with `Exact` variants on `Rational64`.

pub mod catalog;
pub mod costmodel;
pub mod evaluation;
pub mod geometry;
pub mod ingest;
pub mod scalar;
pub mod stats;
pub mod taxonomy;

pub use num_rational::Rational64;
pub use scalar::Scalar;

pub type BoundingBox = geometry::Bbox<f64>;
pub type BoundingBox32 = geometry::Bbox<f32>;
pub type Detection = evaluation::Detection<f64>;
pub type GroundTruth = evaluation::GroundTruth<f64>;
pub type Matching = evaluation::Matching<f64>;
pub type Segment = evaluation::Segment<f64>;
pub type ActivitySignal = evaluation::ActivitySignal<f64>;
pub type Frame = evaluation::Frame<f64>;
pub type Histogram = stats::Histogram<f64>;
pub type SizeDistribution = stats::SizeDistribution<f64>;
pub type CoverageReport = stats::CoverageReport<f64>;
pub type CostEstimate = costmodel::CostEstimate<f64>;
pub type ExactCostEstimate = costmodel::CostEstimate<Rational64>;
pub type ExactSegment = evaluation::Segment<Rational64>;
