use std::fmt::Write as _;

use serde::Serialize;

use super::StatsError;
use crate::Scalar;

/// Counts over half-open bins `[edges[i], edges[i + 1])`. The last bin also
/// takes values equal to its upper edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram<T> {
    pub edges: Vec<T>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl<T: Scalar> Histogram<T> {
    pub fn new(edges: Vec<T>) -> Result<Self, StatsError> {
        if edges.len() < 2
            || edges.iter().any(|e| !e.is_finite_value())
            || edges.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(StatsError::InvalidEdges);
        }
        let bins = edges.len() - 1;
        Ok(Self { edges, counts: vec![0; bins], total: 0 })
    }

    /// Unit-width bins `[0,1), [1,2), ..., [max, max+1)`.
    pub fn integer(max: usize) -> Self {
        let edges = (0..=max + 1).map(T::from_usize).collect();
        Self::new(edges).expect("integer edges increase")
    }

    /// `bins` log-spaced bins over `[lo, hi]`.
    pub fn log_spaced(lo: f64, hi: f64, bins: usize) -> Result<Self, StatsError> {
        if !(lo > 0.0 && hi > lo && bins > 0) {
            return Err(StatsError::InvalidEdges);
        }
        Self::new(log_edges(lo, hi, bins).into_iter().map(T::from_f64).collect())
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_of(&self, v: T) -> Option<usize> {
        let last = self.edges.len() - 1;
        if v < self.edges[0] || v > self.edges[last] {
            return None;
        }
        if v == self.edges[last] {
            return Some(last - 1);
        }
        Some(self.edges.partition_point(|e| *e <= v) - 1)
    }

    /// Adds `v`; values outside the edges are dropped and `false` returned.
    pub fn add(&mut self, v: T) -> bool {
        match self.bin_of(v) {
            Some(b) => {
                self.counts[b] += 1;
                self.total += 1;
                true
            }
            None => false,
        }
    }

    pub fn fractions(&self) -> Vec<T> {
        if self.total == 0 {
            return vec![T::zero(); self.bins()];
        }
        let total = T::from_usize(self.total as usize);
        self.counts.iter().map(|c| T::from_usize(*c as usize) / total).collect()
    }

    pub fn percents(&self) -> Vec<T> {
        let hundred = T::from_usize(100);
        self.fractions().into_iter().map(|f| f * hundred).collect()
    }

    /// `lower,upper,count,percent` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lower,upper,count,percent\n");
        for (i, p) in self.percents().into_iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.edges[i].to_f64(),
                self.edges[i + 1].to_f64(),
                self.counts[i],
                p.to_f64()
            );
        }
        out
    }
}

pub fn log_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let mut edges: Vec<f64> = (0..=bins).map(|i| 10f64.powf(a + (b - a) * i as f64 / bins as f64)).collect();
    edges[0] = lo;
    edges[bins] = hi;
    edges
}
