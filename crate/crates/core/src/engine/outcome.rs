use serde::{Deserialize, Serialize};

use super::pass::{map_chunks, Source};
use super::{Backend, EstimatorConfig};
use crate::error::{Result, VoiError};
use crate::problem::DecisionProblem;
use crate::stats::{tree_reduce, Moments};

/// Distribution of the utility of one action under the prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub action: usize,
    pub label: String,
    /// `bins + 1` increasing edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    /// Samples per bin (enumerated outcomes for the exact backend).
    pub counts: Vec<u64>,
    /// Probability mass per bin; sums to 1.
    pub mass: Vec<f64>,
    pub mean: f64,
    pub standard_error: f64,
    /// Probability-weighted quantiles at [`QUANTILE_LEVELS`]; unlike the
    /// bin range these are insensitive to a few extreme samples.
    pub quantiles: Vec<Quantile>,
    pub n_samples: u64,
    pub backend: Backend,
}

/// Levels reported in [`Histogram::quantiles`].
pub const QUANTILE_LEVELS: [f64; 5] = [0.01, 0.05, 0.5, 0.95, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

impl Histogram {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles.iter().find(|q| q.level == level).map(|q| q.value)
    }

    fn bin_of(&self, x: f64) -> usize {
        let bins = self.counts.len();
        let (lo, hi) = (self.edges[0], self.edges[bins]);
        if hi <= lo {
            return 0;
        }
        (((x - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
    }
}

/// Histogram of `u(action, theta)` over the prior, on the same samples the
/// prior solution uses.
pub fn outcome_distribution(problem: &DecisionProblem, action: usize, config: &EstimatorConfig) -> Result<Histogram> {
    config.validate()?;
    let act = problem.actions.get(action).ok_or(VoiError::UnknownAction {
        index: action,
        count: problem.actions.len(),
    })?;
    let source = Source::resolve(problem, config)?;
    let chunks = map_chunks(config, source.len(), |range| {
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        for i in range {
            let (sample, weight, _) = source.scenario(&problem.schema, i)?;
            out.push((problem.eval_at(action, &sample, i as usize)?, weight));
        }
        Ok(out)
    })?;
    let moments = tree_reduce(
        chunks
            .iter()
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|&(x, w)| m.push_weighted(x, w));
                m
            })
            .collect(),
        |a, b| a.merge(&b),
    )
    .unwrap_or_default();
    let mut sorted: Vec<(f64, f64)> = chunks.iter().flatten().copied().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let quantiles = weighted_quantiles(&sorted, &QUANTILE_LEVELS);
    let values = chunks.into_iter().flatten();
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), (x, _)| (l.min(x), h.max(x)));
    let bins = if hi > lo { config.histogram_bins } else { 1 };
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|k| lo + k as f64 * width).collect();
    edges.push(hi);
    let backend = source.backend();
    let mut hist = Histogram {
        action,
        label: act.label.clone(),
        edges,
        counts: vec![0; bins],
        mass: vec![0.0; bins],
        mean: moments.mean,
        standard_error: if backend == Backend::Exact { 0.0 } else { moments.standard_error() },
        quantiles,
        n_samples: source.len(),
        backend,
    };
    let mut total = 0.0;
    for (x, w) in values {
        let k = hist.bin_of(x);
        hist.counts[k] += 1;
        hist.mass[k] += w;
        total += w;
    }
    hist.mass.iter_mut().for_each(|m| *m /= total);
    Ok(hist)
}

/// Smallest value whose cumulative weight reaches each level.
fn weighted_quantiles(sorted: &[(f64, f64)], levels: &[f64]) -> Vec<Quantile> {
    let total: f64 = sorted.iter().map(|p| p.1).sum();
    levels
        .iter()
        .map(|&level| {
            let target = level * total;
            let mut cum = 0.0;
            let value = sorted
                .iter()
                .find(|(_, w)| {
                    cum += w;
                    cum >= target
                })
                .or(sorted.last())
                .map_or(f64::NAN, |p| p.0);
            Quantile { level, value }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_of_equal_weights() {
        let v: Vec<(f64, f64)> = (1..=100).map(|i| (f64::from(i), 1.0)).collect();
        let q = weighted_quantiles(&v, &[0.01, 0.5, 0.99, 1.0]);
        let values: Vec<f64> = q.iter().map(|q| q.value).collect();
        assert_eq!(values, [1.0, 50.0, 99.0, 100.0]);
    }

    #[test]
    fn quantiles_follow_weights() {
        let v = [(-1.0, 0.25), (1.0, 0.75)];
        let q = weighted_quantiles(&v, &[0.2, 0.3]);
        assert_eq!((q[0].value, q[1].value), (-1.0, 1.0));
    }
}
