use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::geometry::{iou_box, Bbox};
use crate::Scalar;

/// A model proposal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection<T> {
    pub bbox: Bbox<T>,
    pub label: String,
    pub score: T,
}

/// An expert annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth<T> {
    pub bbox: Bbox<T>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match<T> {
    pub pred: usize,
    pub truth: usize,
    pub iou: T,
}

/// One-to-one pairing of predictions with truths. Index lists are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching<T> {
    pub matches: Vec<Match<T>>,
    pub unmatched_preds: Vec<usize>,
    pub unmatched_truths: Vec<usize>,
}

/// Greedy matching by descending score.
///
/// Each prediction in turn claims the unclaimed truth with the highest IoU
/// at or above `iou_threshold`, regardless of label. Equal scores are
/// ordered by the prediction's best IoU against any truth, then by input
/// order; equal IoUs go to the earlier truth.
pub fn match_detections<T: Scalar>(
    preds: &[Detection<T>],
    truths: &[GroundTruth<T>],
    iou_threshold: T,
) -> Result<Matching<T>, EvalError> {
    if !(iou_threshold > T::zero() && iou_threshold <= T::one()) {
        return Err(EvalError::InvalidThreshold(iou_threshold.to_f64()));
    }
    for (i, p) in preds.iter().enumerate() {
        if !(p.score >= T::zero() && p.score <= T::one()) {
            return Err(EvalError::InvalidScore { index: i, score: p.score.to_f64() });
        }
    }

    let ious: Vec<Vec<T>> = preds
        .iter()
        .map(|p| truths.iter().map(|t| iou_box(&p.bbox, &t.bbox)).collect())
        .collect();
    let best: Vec<T> = ious.iter().map(|row| row.iter().fold(T::zero(), |m, v| m.max_of(*v))).collect();

    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        let by_score = preds[b].score.partial_cmp(&preds[a].score);
        let by_iou = best[b].partial_cmp(&best[a]);
        by_score
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(by_iou.unwrap_or(std::cmp::Ordering::Equal))
            .then(a.cmp(&b))
    });

    let mut claimed = vec![false; truths.len()];
    let mut matched_pred = vec![false; preds.len()];
    let mut matches = Vec::new();
    for p in order {
        let mut pick: Option<(usize, T)> = None;
        for (t, &iou) in ious[p].iter().enumerate() {
            if claimed[t] || iou < iou_threshold {
                continue;
            }
            if pick.is_none_or(|(_, v)| iou > v) {
                pick = Some((t, iou));
            }
        }
        if let Some((t, iou)) = pick {
            claimed[t] = true;
            matched_pred[p] = true;
            matches.push(Match { pred: p, truth: t, iou });
        }
    }
    matches.sort_by_key(|m| m.pred);
    Ok(Matching {
        matches,
        unmatched_preds: (0..preds.len()).filter(|i| !matched_pred[*i]).collect(),
        unmatched_truths: (0..truths.len()).filter(|i| !claimed[*i]).collect(),
    })
}

/// Counts indexed `[truth][prediction]` over `labels` plus a trailing
/// background slot. The background row holds predictions that matched no
/// truth (false positives); the background column holds truths no
/// prediction matched (false negatives). Background/background is always 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

pub const BACKGROUND: &str = "background";

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len() + 1;
        Self { labels, counts: vec![vec![0; n]; n] }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn background(&self) -> usize {
        self.labels.len()
    }

    pub fn size(&self) -> usize {
        self.labels.len() + 1
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `None` stands for background.
    pub fn get(&self, truth: Option<&str>, pred: Option<&str>) -> u64 {
        let idx = |l: Option<&str>| match l {
            None => Some(self.background()),
            Some(l) => self.index_of(l),
        };
        match (idx(truth), idx(pred)) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }

    pub fn cell(&self, row: usize, col: usize) -> u64 {
        self.counts[row][col]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sum(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    pub fn col_sum(&self, col: usize) -> u64 {
        self.counts.iter().map(|r| r[col]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn label_index(&self, label: &str) -> Result<usize, EvalError> {
        self.index_of(label).ok_or_else(|| EvalError::UnknownLabel(label.to_string()))
    }

    /// Merges labels through `f` (for example fine concepts into
    /// supercategories). New labels keep first-appearance order.
    pub fn rollup(&self, f: impl Fn(&str) -> String) -> ConfusionMatrix {
        let mut labels: Vec<String> = Vec::new();
        let mut map = Vec::with_capacity(self.size());
        for l in &self.labels {
            let target = f(l);
            let i = labels.iter().position(|x| *x == target).unwrap_or_else(|| {
                labels.push(target);
                labels.len() - 1
            });
            map.push(i);
        }
        let mut out = ConfusionMatrix::new(labels);
        map.push(out.background());
        for (r, row) in self.counts.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                out.counts[map[r]][map[c]] += v;
            }
        }
        out
    }

    /// Truth labels down the first column, predictions across the header.
    pub fn to_csv(&self) -> String {
        let esc = |s: &str| {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        let names: Vec<String> =
            self.labels.iter().map(|l| esc(l)).chain(std::iter::once(BACKGROUND.to_string())).collect();
        let mut out = format!("truth\\pred,{}\n", names.join(","));
        for (r, row) in self.counts.iter().enumerate() {
            out.push_str(&names[r]);
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn confusion_matrix<T: Scalar>(
    labels: &[String],
    preds: &[Detection<T>],
    truths: &[GroundTruth<T>],
    matching: &Matching<T>,
) -> Result<ConfusionMatrix, EvalError> {
    let mut cm = ConfusionMatrix::new(labels.to_vec());
    let bg = cm.background();
    for m in &matching.matches {
        let r = cm.label_index(&truths[m.truth].label)?;
        let c = cm.label_index(&preds[m.pred].label)?;
        cm.counts[r][c] += 1;
    }
    for &p in &matching.unmatched_preds {
        let c = cm.label_index(&preds[p].label)?;
        cm.counts[bg][c] += 1;
    }
    for &t in &matching.unmatched_truths {
        let r = cm.label_index(&truths[t].label)?;
        cm.counts[r][bg] += 1;
    }
    Ok(cm)
}

/// Sorted distinct labels from both sides.
pub fn label_set<T>(preds: &[Detection<T>], truths: &[GroundTruth<T>]) -> Vec<String> {
    let mut labels: Vec<String> = preds
        .iter()
        .map(|p| p.label.clone())
        .chain(truths.iter().map(|t| t.label.clone()))
        .collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Matches per image and accumulates one matrix. Images are keyed by any
/// string (file name, frame time...).
pub fn evaluate_images<T: Scalar>(
    preds: &HashMap<String, Vec<Detection<T>>>,
    truths: &HashMap<String, Vec<GroundTruth<T>>>,
    iou_threshold: T,
) -> Result<ConfusionMatrix, EvalError> {
    let all_preds: Vec<Detection<T>> = preds.values().flatten().cloned().collect();
    let all_truths: Vec<GroundTruth<T>> = truths.values().flatten().cloned().collect();
    let labels = label_set(&all_preds, &all_truths);
    let mut total = ConfusionMatrix::new(labels.clone());
    let mut keys: Vec<&String> = preds.keys().chain(truths.keys()).collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let p = preds.get(key).map(Vec::as_slice).unwrap_or_default();
        let t = truths.get(key).map(Vec::as_slice).unwrap_or_default();
        let m = match_detections(p, t, iou_threshold)?;
        let cm = confusion_matrix(&labels, p, t, &m)?;
        for (r, row) in cm.counts.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                total.counts[r][c] += v;
            }
        }
    }
    Ok(total)
}
