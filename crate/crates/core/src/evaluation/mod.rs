//! Detector scoring: box matching with background-aware confusion
//! matrices, and per-frame activity turned into reviewable segments.

mod boxes;
mod temporal;

pub use boxes::*;
pub use temporal::*;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_WINDOW_S: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("IoU threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("detection {index} has score {score} outside [0, 1]")]
    InvalidScore { index: usize, score: f64 },
    #[error("label {0:?} is not in the declared label list")]
    UnknownLabel(String),
    #[error("frame timestamps must strictly increase (frame {index})")]
    UnorderedTimestamps { index: usize },
    #[error("{times} timestamps but {flags} activity flags")]
    LengthMismatch { times: usize, flags: usize },
    #[error("smoothing window must be positive, got {0}")]
    InvalidWindow(f64),
    #[error("segment [{start}, {end}] must have end > start")]
    InvalidSegment { start: f64, end: f64 },
    #[error("flagged duration {flagged} must fit in a positive total duration {total}")]
    InvalidDuration { total: f64, flagged: f64 },
}
