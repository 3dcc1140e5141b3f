use serde::{Deserialize, Serialize};

use super::{Detection, EvalError};
use crate::Scalar;

/// Closed time interval in seconds with `end > start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub start: T,
    pub end: T,
}

impl<T: Scalar> Segment<T> {
    pub fn new(start: T, end: T) -> Result<Self, EvalError> {
        if !(start.is_finite_value() && end.is_finite_value() && end > start) {
            return Err(EvalError::InvalidSegment { start: start.to_f64(), end: end.to_f64() });
        }
        Ok(Self { start, end })
    }

    pub fn duration(&self) -> T {
        self.end - self.start
    }
}

/// Sorts and merges overlapping or touching segments, so the result is
/// pairwise disjoint with strictly positive gaps.
pub fn normalize<T: Scalar>(segments: &[Segment<T>]) -> Vec<Segment<T>> {
    let mut sorted = segments.to_vec();
    sorted.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Segment<T>> = Vec::with_capacity(sorted.len());
    for s in sorted {
        match out.last_mut() {
            Some(last) if s.start <= last.end => last.end = last.end.max_of(s.end),
            _ => out.push(s),
        }
    }
    out
}

pub fn is_normalized<T: Scalar>(segments: &[Segment<T>]) -> bool {
    segments.iter().all(|s| s.end > s.start) && segments.windows(2).all(|w| w[0].end < w[1].start)
}

/// Total covered duration.
pub fn union_duration<T: Scalar>(segments: &[Segment<T>]) -> T {
    normalize(segments).iter().fold(T::zero(), |acc, s| acc + s.duration())
}

/// Duration covered by both lists.
pub fn intersection_duration<T: Scalar>(a: &[Segment<T>], b: &[Segment<T>]) -> T {
    let (a, b) = (normalize(a), normalize(b));
    let (mut i, mut j) = (0, 0);
    let mut total = T::zero();
    while i < a.len() && j < b.len() {
        let lo = a[i].start.max_of(b[j].start);
        let hi = a[i].end.min_of(b[j].end);
        if hi > lo {
            total = total + (hi - lo);
        }
        if a[i].end < b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// Intersection over union of two activity timelines; two empty timelines
/// agree perfectly (1).
pub fn temporal_iou<T: Scalar>(a: &[Segment<T>], b: &[Segment<T>]) -> T {
    let inter = intersection_duration(a, b);
    let union = union_duration(a) + union_duration(b) - inter;
    if union <= T::zero() {
        T::one()
    } else {
        inter / union
    }
}

/// Fraction of truth segments that overlap some predicted segment for a
/// nonzero duration. `None` when there are no truth segments.
pub fn event_recall<T: Scalar>(pred: &[Segment<T>], truth: &[Segment<T>]) -> Option<T> {
    if truth.is_empty() {
        return None;
    }
    let hits = truth
        .iter()
        .filter(|t| pred.iter().any(|p| p.end.min_of(t.end) > p.start.max_of(t.start)))
        .count();
    Some(T::from_usize(hits) / T::from_usize(truth.len()))
}

/// Share of footage a reviewer can skip: `1 - flagged / total`.
pub fn effort_reduction<T: Scalar>(pred: &[Segment<T>], total_duration: T) -> Result<T, EvalError> {
    let flagged = union_duration(pred);
    if !(total_duration > T::zero()) || flagged > total_duration {
        return Err(EvalError::InvalidDuration { total: total_duration.to_f64(), flagged: flagged.to_f64() });
    }
    Ok(T::one() - flagged / total_duration)
}

/// Per-frame binary activity.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySignal<T> {
    times: Vec<T>,
    active: Vec<bool>,
}

impl<T: Scalar> ActivitySignal<T> {
    pub fn new(times: Vec<T>, active: Vec<bool>) -> Result<Self, EvalError> {
        if times.len() != active.len() {
            return Err(EvalError::LengthMismatch { times: times.len(), flags: active.len() });
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite_value()) {
            return Err(EvalError::UnorderedTimestamps { index: i });
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(EvalError::UnorderedTimestamps { index: i + 1 });
        }
        Ok(Self { times, active })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Detections of one video frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    pub time: T,
    pub detections: Vec<Detection<T>>,
}

/// A frame is active when any detection scores at least `score_threshold`.
pub fn activity_signal<T: Scalar>(frames: &[Frame<T>], score_threshold: T) -> Result<ActivitySignal<T>, EvalError> {
    ActivitySignal::new(
        frames.iter().map(|f| f.time).collect(),
        frames.iter().map(|f| f.detections.iter().any(|d| d.score >= score_threshold)).collect(),
    )
}

/// Binary closing on the frame clock: every run of inactive frames lying
/// strictly between two active frames less than `window` seconds apart is
/// switched on. Nothing before the first or after the last active frame
/// changes.
pub fn close_gaps<T: Scalar>(signal: &ActivitySignal<T>, window: T) -> ActivitySignal<T> {
    let mut active = signal.active.clone();
    let mut prev: Option<usize> = None;
    for i in 0..active.len() {
        if !signal.active[i] {
            continue;
        }
        if let Some(p) = prev {
            if i > p + 1 && signal.times[i] - signal.times[p] < window {
                active[p + 1..i].iter_mut().for_each(|a| *a = true);
            }
        }
        prev = Some(i);
    }
    ActivitySignal { times: signal.times.clone(), active }
}

/// One segment per run of active frames, from the run's first to last
/// frame time. A run of a single frame covers half the interval to each
/// neighbouring frame (or the whole interval to its only neighbour,
/// centred); a signal with one frame has no clock and yields nothing.
pub fn segments_of<T: Scalar>(signal: &ActivitySignal<T>) -> Vec<Segment<T>> {
    let t = &signal.times;
    let n = t.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if !signal.active[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && signal.active[i + 1] {
            i += 1;
        }
        let end = i;
        i += 1;
        if end > start {
            out.push(Segment { start: t[start], end: t[end] });
            continue;
        }
        let half = T::half();
        let before = (start > 0).then(|| (t[start] - t[start - 1]) * half);
        let after = (start + 1 < n).then(|| (t[start + 1] - t[start]) * half);
        let (b, a) = match (before, after) {
            (Some(b), Some(a)) => (b, a),
            (Some(b), None) => (b, b),
            (None, Some(a)) => (a, a),
            (None, None) => continue,
        };
        out.push(Segment { start: t[start] - b, end: t[start] + a });
    }
    out
}

/// Fills gaps shorter than `window` seconds, then emits activity segments.
pub fn smooth_and_segment<T: Scalar>(signal: &ActivitySignal<T>, window: T) -> Result<Vec<Segment<T>>, EvalError> {
    if !(window > T::zero() && window.is_finite_value()) {
        return Err(EvalError::InvalidWindow(window.to_f64()));
    }
    Ok(segments_of(&close_gaps(signal, window)))
}

/// Temporal scores for one video.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActivityScore<T> {
    pub iou: T,
    pub intersection: T,
    pub union: T,
    pub event_recall: Option<T>,
    pub effort_reduction: Option<T>,
}

pub fn score_activity<T: Scalar>(
    pred: &[Segment<T>],
    truth: &[Segment<T>],
    total_duration: Option<T>,
) -> Result<ActivityScore<T>, EvalError> {
    let intersection = intersection_duration(pred, truth);
    let union = union_duration(pred) + union_duration(truth) - intersection;
    Ok(ActivityScore {
        iou: temporal_iou(pred, truth),
        intersection,
        union,
        event_recall: event_recall(pred, truth),
        effort_reduction: total_duration.map(|d| effort_reduction(pred, d)).transpose()?,
    })
}

/// Aggregates over several videos two ways: the mean of per-video IoUs, and
/// pooled IoU (summed intersections over summed unions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PooledActivity<T> {
    pub videos: usize,
    pub mean_iou: T,
    pub pooled_iou: T,
    pub pooled_event_recall: Option<T>,
}

pub fn pool_scores<T: Scalar>(scores: &[ActivityScore<T>], truth_counts: &[usize]) -> PooledActivity<T> {
    let n = scores.len();
    let mean_iou = if n == 0 {
        T::one()
    } else {
        scores.iter().fold(T::zero(), |a, s| a + s.iou) / T::from_usize(n)
    };
    let (inter, union) = scores.iter().fold((T::zero(), T::zero()), |(i, u), s| (i + s.intersection, u + s.union));
    let pooled_iou = if union <= T::zero() { T::one() } else { inter / union };
    let total_truth: usize = truth_counts.iter().sum();
    let hits = scores
        .iter()
        .zip(truth_counts)
        .filter_map(|(s, &c)| s.event_recall.map(|r| r * T::from_usize(c)))
        .fold(T::zero(), |a, v| a + v);
    PooledActivity {
        videos: n,
        mean_iou,
        pooled_iou,
        pooled_event_recall: (total_truth > 0).then(|| hits / T::from_usize(total_truth)),
    }
}
