use std::collections::HashSet;

use serde::Serialize;

use super::{Histogram, StatsError};
use crate::catalog::ImageEntry;
use crate::taxonomy::{ConceptTree, Rank};
use crate::Scalar;

pub const SIZE_BINS: usize = 20;
pub const SIZE_MIN: f64 = 1e-5;
pub const SIZE_MAX: f64 = 1.0;

fn count_histogram<T: Scalar>(counts: &[usize]) -> Histogram<T> {
    let mut h = Histogram::integer(counts.iter().copied().max().unwrap_or(0));
    for c in counts {
        h.add(T::from_usize(*c));
    }
    h
}

fn nonempty(snapshot: &[ImageEntry]) -> Result<(), StatsError> {
    if snapshot.is_empty() {
        Err(StatsError::EmptySnapshot)
    } else {
        Ok(())
    }
}

/// Localizations per image, in snapshot order.
pub fn instance_counts(snapshot: &[ImageEntry]) -> Vec<usize> {
    snapshot.iter().map(|e| e.localizations.len()).collect()
}

pub fn instances_per_image<T: Scalar>(snapshot: &[ImageEntry]) -> Result<Histogram<T>, StatsError> {
    nonempty(snapshot)?;
    Ok(count_histogram(&instance_counts(snapshot)))
}

/// Distinct rank labels per image at `rank`, in snapshot order.
pub fn concept_counts(snapshot: &[ImageEntry], tree: &ConceptTree, rank: Rank) -> Result<Vec<usize>, StatsError> {
    snapshot
        .iter()
        .map(|e| {
            let mut labels = HashSet::new();
            for l in &e.localizations {
                labels.insert(tree.rank_label(tree.resolve(&l.concept)?, rank)?);
            }
            Ok(labels.len())
        })
        .collect()
}

pub fn concepts_per_image<T: Scalar>(
    snapshot: &[ImageEntry],
    tree: &ConceptTree,
    rank: Rank,
) -> Result<Histogram<T>, StatsError> {
    nonempty(snapshot)?;
    Ok(count_histogram(&concept_counts(snapshot, tree, rank)?))
}

fn mean<T: Scalar>(values: &[usize]) -> T {
    T::from_usize(values.iter().sum()) / T::from_usize(values.len())
}

/// Mean localizations and mean distinct rank labels per image.
pub fn mean_instances_and_concepts<T: Scalar>(
    snapshot: &[ImageEntry],
    tree: &ConceptTree,
    rank: Rank,
) -> Result<(T, T), StatsError> {
    nonempty(snapshot)?;
    Ok((mean(&instance_counts(snapshot)), mean(&concept_counts(snapshot, tree, rank)?)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeDistribution<T> {
    pub histogram: Histogram<T>,
    /// Localizations on images whose pixel dimensions are unknown.
    pub excluded: usize,
}

/// Box area over image area for every localization on an image with known
/// dimensions.
pub fn relative_sizes<T: Scalar>(snapshot: &[ImageEntry]) -> (Vec<T>, usize) {
    let mut sizes = Vec::new();
    let mut excluded = 0;
    for e in snapshot {
        let (Some(w), Some(h)) = (e.image.width_px, e.image.height_px) else {
            excluded += e.localizations.len();
            continue;
        };
        let frame = T::from_usize(w as usize) * T::from_usize(h as usize);
        for l in &e.localizations {
            sizes.push(T::from_f64(l.bbox.width) * T::from_f64(l.bbox.height) / frame);
        }
    }
    (sizes, excluded)
}

/// Relative sizes over 20 log-spaced bins on `[1e-5, 1]`. Sizes below
/// `1e-5` are counted in the first bin.
pub fn relative_size_distribution<T: Scalar>(snapshot: &[ImageEntry]) -> Result<SizeDistribution<T>, StatsError> {
    nonempty(snapshot)?;
    let mut histogram = Histogram::<T>::log_spaced(SIZE_MIN, SIZE_MAX, SIZE_BINS)?;
    let lo = histogram.edges[0];
    let hi = histogram.edges[SIZE_BINS];
    let (sizes, excluded) = relative_sizes::<T>(snapshot);
    for s in sizes {
        histogram.add(s.max_of(lo).min_of(hi));
    }
    Ok(SizeDistribution { histogram, excluded })
}

#[cfg(test)]
mod tests {
    use num_rational::Rational64;

    use super::*;
    use crate::catalog::{ImageRecord, Localization};
    use crate::BoundingBox;

    fn tree() -> ConceptTree {
        ConceptTree::parse(include_str!("../../fixtures/taxonomy.tsv")).unwrap()
    }

    fn entry(concepts: &[&str]) -> ImageEntry {
        let mut image = ImageRecord::new("http://example.org/x.png");
        image.width_px = Some(100);
        image.height_px = Some(100);
        let localizations = concepts
            .iter()
            .map(|c| Localization::new(*c, BoundingBox { x: 0.0, y: 0.0, width: 10.0, height: 10.0 }))
            .collect();
        ImageEntry { image, localizations }
    }

    #[test]
    fn instances_example() {
        let snap = vec![entry(&["Aegina"]), entry(&["Aegina"]), entry(&["Aegina", "Aegina"])];
        let h = instances_per_image::<Rational64>(&snap).unwrap();
        assert_eq!(h.counts, vec![0, 2, 1]);
        assert_eq!(h.fractions(), vec![Rational64::from_integer(0), Rational64::new(2, 3), Rational64::new(1, 3)]);
        let (inst, _) = mean_instances_and_concepts::<Rational64>(&snap, &tree(), Rank::Genus).unwrap();
        assert_eq!(inst, Rational64::new(4, 3));
    }

    #[test]
    fn empty_images_land_in_bin_zero() {
        let h = instances_per_image::<f64>(&[entry(&[])]).unwrap();
        assert_eq!(h.counts, vec![1]);
        assert_eq!(h.percents(), vec![100.0]);
        assert_eq!(instances_per_image::<f64>(&[]), Err(StatsError::EmptySnapshot));
        assert_eq!(relative_size_distribution::<f64>(&[]), Err(StatsError::EmptySnapshot));
    }

    #[test]
    fn concept_collapse_by_rank() {
        let t = tree();
        let snap = vec![entry(&["Bathochordaeus mcnutti", "Bathochordaeus"]), entry(&[])];
        assert_eq!(concept_counts(&snap, &t, Rank::Genus).unwrap(), vec![1, 0]);
        assert_eq!(concept_counts(&snap, &t, Rank::Species).unwrap(), vec![2, 0]);
        let h = concepts_per_image::<f64>(&snap, &t, Rank::Species).unwrap();
        assert_eq!(h.counts, vec![1, 0, 1]);
        assert!(matches!(
            concept_counts(&[entry(&["Nessie"])], &t, Rank::Genus),
            Err(StatsError::Taxonomy(_))
        ));
    }

    #[test]
    fn singleton_means() {
        let snap = vec![entry(&["Aegina"]), entry(&["Paragorgia"])];
        let m = mean_instances_and_concepts::<f64>(&snap, &tree(), Rank::Family).unwrap();
        assert_eq!(m, (1.0, 1.0));
    }

    #[test]
    fn size_examples() {
        let mut full = entry(&["Aegina"]);
        full.localizations[0].bbox = BoundingBox { x: 0.0, y: 0.0, width: 100.0, height: 100.0 };
        let mut unknown = entry(&["Aegina", "Aegina"]);
        unknown.image.width_px = None;
        let snap = vec![entry(&["Aegina"]), full, unknown];
        let (sizes, excluded) = relative_sizes::<Rational64>(&snap);
        assert_eq!(sizes, vec![Rational64::new(1, 100), Rational64::from_integer(1)]);
        assert_eq!(excluded, 2);
        let d = relative_size_distribution::<f64>(&snap).unwrap();
        assert_eq!(d.excluded, 2);
        assert_eq!(d.histogram.total, 2);
        assert_eq!(d.histogram.counts[19], 1);
        assert_eq!(d.histogram.counts[12], 1);
    }

    #[test]
    fn tiny_boxes_clamp_into_first_bin() {
        let mut e = entry(&["Aegina"]);
        e.image.width_px = Some(10_000);
        e.image.height_px = Some(10_000);
        e.localizations[0].bbox = BoundingBox { x: 0.0, y: 0.0, width: 1.0, height: 1.0 };
        let d = relative_size_distribution::<f64>(&[e]).unwrap();
        assert_eq!(d.histogram.counts[0], 1);
    }
}
