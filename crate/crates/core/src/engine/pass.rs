use std::ops::Range;

use rayon::prelude::*;

use super::{argmax, ActionFrequency, ActionStat, Backend, EstimatorConfig, PriorSolution, CHUNK, MAX_ENUMERATION};
use crate::error::{Result, VoiError};
use crate::problem::{DecisionProblem, ParameterSchema, ScenarioSample};
use crate::rng::{stream, Domain, Stream};
use crate::stats::{tree_reduce, Moments};

const MAX_REDRAWS: u64 = 1_000_000;

/// Draws every parameter in schema order from `rng`, redrawing values at or
/// above a ceiling. Returns the sample and the number of redraws.
pub(crate) fn draw_from(schema: &ParameterSchema, rng: &mut Stream) -> Result<(ScenarioSample, u64)> {
    let mut redraws = 0;
    let mut values = Vec::with_capacity(schema.len());
    for p in schema.iter() {
        let mut x = p.distribution.sample(rng);
        if let Some(c) = p.ceiling {
            while x >= c {
                redraws += 1;
                if redraws > MAX_REDRAWS {
                    return Err(VoiError::InvalidProblem(format!(
                        "parameter `{}` keeps drawing at or above its ceiling {c}",
                        p.name
                    )));
                }
                x = p.distribution.sample(rng);
            }
        }
        values.push(x);
    }
    Ok((ScenarioSample::new(values), redraws))
}

pub(crate) fn draw_prior(schema: &ParameterSchema, seed: u64, index: u64) -> Result<(ScenarioSample, u64)> {
    draw_from(schema, &mut stream(seed, Domain::Prior, index))
}

/// Where the θ samples come from.
pub(crate) enum Source {
    MonteCarlo { seed: u64, n: u64 },
    Exact { axes: Vec<Vec<(f64, f64)>>, total: u64 },
}

impl Source {
    pub(crate) fn resolve(problem: &DecisionProblem, config: &EstimatorConfig) -> Result<Self> {
        let outcomes = problem.schema.joint_outcomes();
        let exact = match config.backend {
            Backend::Auto => outcomes.is_some_and(|n| n <= MAX_ENUMERATION),
            Backend::Exact => {
                if outcomes.is_none() {
                    return Err(VoiError::InvalidConfig(
                        "exact backend needs every prior to have finite support".into(),
                    ));
                }
                true
            }
            Backend::MonteCarlo => false,
            Backend::Preposterior => {
                return Err(VoiError::InvalidConfig("preposterior is not a selectable backend".into()))
            }
        };
        if !exact {
            return Ok(Source::MonteCarlo {
                seed: config.seed,
                n: config.n_samples,
            });
        }
        let axes: Vec<Vec<(f64, f64)>> = problem
            .schema
            .iter()
            .map(|p| {
                let mut pts = p.distribution.finite_support().expect("finite support checked");
                if let Some(c) = p.ceiling {
                    pts.retain(|(x, _)| *x < c);
                    let total: f64 = pts.iter().map(|q| q.1).sum();
                    pts.iter_mut().for_each(|q| q.1 /= total);
                }
                pts
            })
            .collect();
        let total = axes.iter().map(|a| a.len() as u64).product();
        Ok(Source::Exact { axes, total })
    }

    pub(crate) fn backend(&self) -> Backend {
        match self {
            Source::MonteCarlo { .. } => Backend::MonteCarlo,
            Source::Exact { .. } => Backend::Exact,
        }
    }

    pub(crate) fn len(&self) -> u64 {
        match self {
            Source::MonteCarlo { n, .. } => *n,
            Source::Exact { total, .. } => *total,
        }
    }

    /// Sample `index` with its probability weight and redraw count.
    pub(crate) fn scenario(&self, schema: &ParameterSchema, index: u64) -> Result<(ScenarioSample, f64, u64)> {
        match self {
            Source::MonteCarlo { seed, .. } => {
                let (s, r) = draw_prior(schema, *seed, index)?;
                Ok((s, 1.0, r))
            }
            Source::Exact { axes, .. } => {
                // mixed radix, last parameter fastest
                let mut rest = index;
                let mut values = vec![0.0; axes.len()];
                let mut weight = 1.0;
                for (i, axis) in axes.iter().enumerate().rev() {
                    let k = (rest % axis.len() as u64) as usize;
                    rest /= axis.len() as u64;
                    values[i] = axis[k].0;
                    weight *= axis[k].1;
                }
                Ok((ScenarioSample::new(values), weight, 0))
            }
        }
    }
}

/// Runs `f` over fixed chunks of `0..n` on the configured workers, returning
/// chunk results in chunk order. The first failing chunk (in order) wins.
pub(crate) fn map_chunks<T, F>(config: &EstimatorConfig, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> Result<T> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let results: Vec<Result<T>> = config.run(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(n)))
            .collect()
    })?;
    results.into_iter().collect()
}

#[derive(Debug, Clone)]
pub(crate) struct PassSummary {
    pub backend: Backend,
    pub n: u64,
    pub utility: Vec<Moments>,
    /// Per action `a`, moments of `max_b u(b, theta) - u(a, theta)`.
    pub regret: Vec<Moments>,
    /// Probability mass on which each action is the per-sample optimum.
    pub best_mass: Vec<f64>,
    pub redraws: u64,
}

impl PassSummary {
    pub(crate) fn empty(actions: usize, backend: Backend) -> Self {
        Self {
            backend,
            n: 0,
            utility: vec![Moments::default(); actions],
            regret: vec![Moments::default(); actions],
            best_mass: vec![0.0; actions],
            redraws: 0,
        }
    }

    /// Adds one sample's per-action values.
    pub(crate) fn push(&mut self, values: &[f64], weight: f64) {
        let best = argmax(values.iter().copied());
        let max = values[best];
        for (a, &u) in values.iter().enumerate() {
            self.utility[a].push_weighted(u, weight);
            self.regret[a].push_weighted(max - u, weight);
        }
        self.best_mass[best] += weight;
        self.n += 1;
    }

    pub(crate) fn merge(self, other: Self) -> Self {
        Self {
            backend: self.backend,
            n: self.n + other.n,
            utility: self.utility.iter().zip(&other.utility).map(|(a, b)| a.merge(b)).collect(),
            regret: self.regret.iter().zip(&other.regret).map(|(a, b)| a.merge(b)).collect(),
            best_mass: self.best_mass.iter().zip(&other.best_mass).map(|(a, b)| a + b).collect(),
            redraws: self.redraws + other.redraws,
        }
    }

    fn se(&self, m: &Moments) -> f64 {
        if self.backend == Backend::Exact {
            0.0
        } else {
            m.standard_error()
        }
    }

    pub(crate) fn prior_solution(&self, problem: &DecisionProblem) -> PriorSolution {
        let per_action: Vec<ActionStat> = problem
            .actions
            .iter()
            .zip(&self.utility)
            .map(|(a, m)| ActionStat {
                action: a.index,
                label: a.label.clone(),
                payload: a.payload,
                mean: m.mean,
                standard_error: self.se(m),
            })
            .collect();
        let best = argmax(per_action.iter().map(|s| s.mean));
        PriorSolution {
            best_action: best,
            best_label: per_action[best].label.clone(),
            expected_utility: per_action[best].mean,
            standard_error: per_action[best].standard_error,
            per_action,
            backend: self.backend,
            n_samples: self.n,
            redraws: self.redraws,
        }
    }

    pub(crate) fn frequencies(&self, problem: &DecisionProblem) -> Vec<ActionFrequency> {
        let total: f64 = self.best_mass.iter().sum();
        problem
            .actions
            .iter()
            .zip(&self.best_mass)
            .map(|(a, m)| ActionFrequency {
                action: a.index,
                label: a.label.clone(),
                fraction: m / total,
            })
            .collect()
    }
}

/// Utilities of every action on every prior sample, reduced to moments.
pub(crate) fn utility_pass(problem: &DecisionProblem, config: &EstimatorConfig) -> Result<PassSummary> {
    config.validate()?;
    if problem.actions.is_empty() {
        return Err(VoiError::InvalidProblem("action space is empty".into()));
    }
    let source = Source::resolve(problem, config)?;
    let backend = source.backend();
    let n_actions = problem.actions.len();
    let chunks = map_chunks(config, source.len(), |range| {
        let mut acc = PassSummary::empty(n_actions, backend);
        let mut values = vec![0.0; n_actions];
        for i in range {
            let (sample, weight, redraws) = source.scenario(&problem.schema, i)?;
            acc.redraws += redraws;
            for (a, v) in values.iter_mut().enumerate() {
                *v = problem.eval_at(a, &sample, i as usize)?;
            }
            acc.push(&values, weight);
        }
        Ok(acc)
    })?;
    Ok(tree_reduce(chunks, PassSummary::merge).unwrap_or_else(|| PassSummary::empty(n_actions, backend)))
}
