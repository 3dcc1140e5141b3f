//! Coverage sampling and recall.
//!
//! Sampling is reproducible across platforms: the generator is ChaCha8
//! seeded with the little-endian bytes of the `u64` seed (remaining key
//! bytes zero), stream 0. Each draw `below(n)` takes 64-bit outputs and
//! rejects values under `2^64 mod n`, then reduces mod `n`. The sample is
//! the prefix of a partial Fisher-Yates shuffle over candidates in snapshot
//! order: for `i` in `0..k`, swap `i` with `i + below(len - i)`.
//!
//! Recall uses the convention 0/0 = 1: an image with no objects of a kind
//! is vacuously fully covered for that kind.

use std::collections::{BTreeSet, HashMap};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::catalog::ImageEntry;
use crate::taxonomy::{ConceptTree, NodeId, Rank};
use crate::Scalar;

pub const DEFAULT_SAMPLE_SIZE: usize = 50;

/// Seeded generator with the pinned algorithm above.
#[derive(Debug, Clone)]
pub struct SampleRng {
    inner: ChaCha8Rng,
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self { inner: ChaCha8Rng::from_seed(key) }
    }

    /// Independent generator on `stream` of the same seed.
    pub fn split(seed: u64, stream: u64) -> Self {
        let mut rng = Self::new(seed);
        rng.inner.set_stream(stream);
        rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `0..n`. Panics when `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.inner.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    /// `k` distinct items drawn uniformly, in draw order.
    pub fn sample<T: Clone>(&mut self, items: &[T], k: usize) -> Vec<T> {
        let mut pool: Vec<T> = items.to_vec();
        let k = k.min(pool.len());
        for i in 0..k {
            let j = i + self.below((pool.len() - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// The node `concept` labels at `rank`, and the snapshot indices of images
/// holding a localization of that node or any descendant.
pub fn coverage_candidates(
    snapshot: &[ImageEntry],
    tree: &ConceptTree,
    concept: &str,
    rank: Rank,
) -> Result<(NodeId, Vec<usize>), StatsError> {
    let target = tree.rank_label(tree.resolve(concept)?, rank)?;
    let names = target_concepts(tree, target);
    let candidates = snapshot
        .iter()
        .enumerate()
        .filter(|(_, e)| e.localizations.iter().any(|l| names.contains(&l.concept)))
        .map(|(i, _)| i)
        .collect();
    Ok((target, candidates))
}

/// Canonical names of `node` and its descendants.
pub fn target_concepts(tree: &ConceptTree, node: NodeId) -> BTreeSet<String> {
    tree.descendants(node).into_iter().map(|d| tree.name(d).to_string()).collect()
}

/// Up to `n` images sampled without replacement from the candidates for
/// `concept` at `rank`.
pub fn coverage_sample<'a>(
    snapshot: &'a [ImageEntry],
    tree: &ConceptTree,
    concept: &str,
    rank: Rank,
    n: usize,
    seed: u64,
) -> Result<Vec<&'a ImageEntry>, StatsError> {
    if n == 0 {
        return Err(StatsError::InvalidSampleSize);
    }
    let (target, candidates) = coverage_candidates(snapshot, tree, concept, rank)?;
    if candidates.is_empty() {
        return Err(StatsError::NoCandidates { concept: tree.name(target).to_string(), rank });
    }
    let picked = SampleRng::new(seed).sample(&candidates, n);
    Ok(picked.into_iter().map(|i| &snapshot[i]).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRef {
    pub id: String,
    pub concept: String,
}

impl AnnotationRef {
    pub fn new(id: impl Into<String>, concept: impl Into<String>) -> Self {
        Self { id: id.into(), concept: concept.into() }
    }
}

/// Annotations on one image before and after expert completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageAnnotations {
    pub image: String,
    pub existing: Vec<AnnotationRef>,
    pub complete: Vec<AnnotationRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImageCoverage {
    pub existing_target: usize,
    pub complete_target: usize,
    pub existing_other: usize,
    pub complete_other: usize,
}

impl ImageCoverage {
    pub fn recall_target<T: Scalar>(&self) -> T {
        ratio(self.existing_target, self.complete_target)
    }

    pub fn recall_other<T: Scalar>(&self) -> T {
        ratio(self.existing_other, self.complete_other)
    }
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        T::one()
    } else {
        T::from_usize(num) / T::from_usize(den)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport<T> {
    pub concept: String,
    pub rank: Rank,
    pub seed: u64,
    pub n: usize,
    pub images: Vec<(String, ImageCoverage)>,
    /// Mean of per-image recalls.
    pub recall_target: T,
    pub recall_other: T,
    /// Annotation totals pooled over all images.
    pub pooled_recall_target: T,
    pub pooled_recall_other: T,
}

fn tally(image: &ImageAnnotations, target: &BTreeSet<String>) -> Result<ImageCoverage, StatsError> {
    let inconsistent = |message: String| StatsError::Inconsistent { image: image.image.clone(), message };
    let mut complete: HashMap<&str, &str> = HashMap::new();
    for a in &image.complete {
        if complete.insert(&a.id, &a.concept).is_some() {
            return Err(inconsistent(format!("annotation {} listed twice in the completed set", a.id)));
        }
    }
    let mut seen = BTreeSet::new();
    for a in &image.existing {
        if !seen.insert(a.id.as_str()) {
            return Err(inconsistent(format!("annotation {} listed twice in the existing set", a.id)));
        }
        match complete.get(a.id.as_str()) {
            None => return Err(inconsistent(format!("existing annotation {} missing from the completed set", a.id))),
            Some(c) if *c != a.concept => {
                return Err(inconsistent(format!("annotation {} relabeled from {} to {c}", a.id, a.concept)))
            }
            Some(_) => {}
        }
    }
    let split = |list: &[AnnotationRef]| {
        let t = list.iter().filter(|a| target.contains(&a.concept)).count();
        (t, list.len() - t)
    };
    let (existing_target, existing_other) = split(&image.existing);
    let (complete_target, complete_other) = split(&image.complete);
    Ok(ImageCoverage { existing_target, complete_target, existing_other, complete_other })
}

/// Recall of existing annotations against expert-completed ones, for the
/// `target` concepts and for everything else. `concept`, `rank` and `seed`
/// describe how the images were chosen and are carried into the report.
pub fn coverage_recall<T: Scalar>(
    concept: &str,
    rank: Rank,
    seed: u64,
    images: &[ImageAnnotations],
    target: &BTreeSet<String>,
) -> Result<CoverageReport<T>, StatsError> {
    let per_image = images
        .iter()
        .map(|img| Ok((img.image.clone(), tally(img, target)?)))
        .collect::<Result<Vec<_>, StatsError>>()?;
    let mean = |f: fn(&ImageCoverage) -> T| {
        if per_image.is_empty() {
            T::one()
        } else {
            per_image.iter().fold(T::zero(), |acc, (_, c)| acc + f(c)) / T::from_usize(per_image.len())
        }
    };
    let sum = |f: fn(&ImageCoverage) -> usize| per_image.iter().map(|(_, c)| f(c)).sum::<usize>();
    Ok(CoverageReport {
        concept: concept.to_string(),
        rank,
        seed,
        n: per_image.len(),
        recall_target: mean(|c| c.recall_target()),
        recall_other: mean(|c| c.recall_other()),
        pooled_recall_target: ratio(sum(|c| c.existing_target), sum(|c| c.complete_target)),
        pooled_recall_other: ratio(sum(|c| c.existing_other), sum(|c| c.complete_other)),
        images: per_image,
    })
}
