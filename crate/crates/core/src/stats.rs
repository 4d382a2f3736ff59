//! Streaming moments with a deterministic merge order.

use serde::{Deserialize, Serialize};

/// Weighted count, mean and sum of squared deviations (West's weighted
/// Welford update), mergeable. Unit weights give the usual sample moments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub weight: f64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.push_weighted(x, 1.0);
    }

    pub fn push_weighted(&mut self, x: f64, w: f64) {
        self.count += 1;
        self.weight += w;
        let delta = x - self.mean;
        self.mean += delta * (w / self.weight);
        self.m2 += w * delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.weight == 0.0 {
            return *other;
        }
        if other.weight == 0.0 {
            return *self;
        }
        let w = self.weight + other.weight;
        let delta = other.mean - self.mean;
        Moments {
            count: self.count + other.count,
            weight: w,
            mean: self.mean * (self.weight / w) + other.mean * (other.weight / w),
            m2: self.m2 + other.m2 + delta * delta * (self.weight * other.weight / w),
        }
    }

    /// Unbiased sample variance under unit weights; zero with fewer than
    /// two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.weight - 1.0)).max(0.0)
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.weight).sqrt()
        }
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Folds items with `combine` as a balanced binary tree over their order.
pub fn tree_reduce<T, F>(mut items: Vec<T>, combine: F) -> Option<T>
where
    F: Fn(T, T) -> T,
{
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}
