use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pass::{draw_from, draw_prior, map_chunks, PassSummary};
use super::{Backend, EstimatorConfig, EviiMethod, VoiKind, VoiReport};
use crate::distributions::DistributionSpec;
use crate::error::{Result, VoiError};
use crate::inference::PriorGrid;
use crate::problem::{DecisionProblem, MeasurementModel, Parameter, ParameterSchema, Role, ScenarioSample};
use crate::rng::{stream, Domain};
use crate::stats::tree_reduce;

/// Expected utility of each action at each grid value of the measured
/// parameter, averaged over the nuisance parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityTable {
    pub parameter: String,
    pub points: Vec<f64>,
    /// `values[action][point]`.
    pub values: Vec<Vec<f64>>,
}

struct Setup<'a> {
    problem: &'a DecisionProblem,
    measurement: &'a MeasurementModel,
    target: usize,
    grid: PriorGrid,
    /// Draws per inner expectation; 1 when every nuisance parameter is fixed.
    draws: usize,
    nuisance: ParameterSchema,
}

impl<'a> Setup<'a> {
    fn new(problem: &'a DecisionProblem, measurement: &'a MeasurementModel, config: &EstimatorConfig) -> Result<Self> {
        config.validate()?;
        if problem.actions.is_empty() {
            return Err(VoiError::InvalidProblem("action space is empty".into()));
        }
        let target = problem
            .schema
            .position(&measurement.target)
            .ok_or_else(|| VoiError::UnknownTarget(measurement.target.clone()))?;
        let param = problem.schema.get(target).expect("position is valid");
        if param.role != Role::Measured {
            return Err(VoiError::NotMeasured(measurement.target.clone()));
        }
        let grid = PriorGrid::new(&param.distribution, &config.posterior_grid, param.ceiling)?;
        let nuisance: Vec<Parameter> = problem
            .schema
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != target)
            .map(|(_, p)| p.clone())
            .collect();
        let fixed = nuisance.iter().all(|p| p.distribution.support_size() == Some(1));
        Ok(Self {
            problem,
            measurement,
            target,
            grid,
            draws: if fixed { 1 } else { config.nuisance_draws },
            nuisance: ParameterSchema::new(nuisance),
        })
    }

    /// Full parameter vector with the target set to `theta` and the
    /// nuisance parameters drawn from `rng`.
    fn scenario(&self, theta: f64, rng: &mut crate::rng::Stream) -> Result<ScenarioSample> {
        let (nuis, _) = draw_from(&self.nuisance, rng)?;
        let mut values = Vec::with_capacity(nuis.len() + 1);
        values.extend_from_slice(&nuis.values()[..self.target]);
        values.push(theta);
        values.extend_from_slice(&nuis.values()[self.target..]);
        Ok(ScenarioSample::new(values))
    }

    /// Nuisance-averaged utilities of every action at `theta`, written to
    /// `out`. Draws come from stream `(seed, domain, key)` so every action
    /// sees the same nuisance values.
    fn inner(&self, theta: f64, seed: u64, domain: Domain, key: u64, index: usize, out: &mut [f64]) -> Result<()> {
        let mut rng = stream(seed, domain, key);
        out.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..self.draws {
            let sample = self.scenario(theta, &mut rng)?;
            for (a, v) in out.iter_mut().enumerate() {
                *v += self.problem.eval_at(a, &sample, index)?;
            }
        }
        let m = self.draws as f64;
        out.iter_mut().for_each(|v| *v /= m);
        Ok(())
    }

    fn table(&self, config: &EstimatorConfig) -> Result<UtilityTable> {
        let n_actions = self.problem.actions.len();
        let points = self.grid.points().to_vec();
        let columns: Vec<Result<Vec<f64>>> = config.run(|| {
            points
                .par_iter()
                .enumerate()
                .map(|(k, &theta)| {
                    let mut col = vec![0.0; n_actions];
                    self.inner(theta, config.seed, Domain::NuisanceGrid, k as u64, k, &mut col)?;
                    Ok(col)
                })
                .collect()
        })?;
        let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
        let values = (0..n_actions).map(|a| columns.iter().map(|c| c[a]).collect()).collect();
        Ok(UtilityTable {
            parameter: self.measurement.target.clone(),
            points,
            values,
        })
    }
}

/// Utility table over the posterior grid of the measured parameter.
pub fn utility_table(
    problem: &DecisionProblem,
    measurement: &MeasurementModel,
    config: &EstimatorConfig,
) -> Result<UtilityTable> {
    Setup::new(problem, measurement, config)?.table(config)
}

/// Expected value of imperfect information from `measurement`.
///
/// For each outer sample the full θ is drawn from the prior and an
/// observation `z` from the likelihood at the true value of the measured
/// parameter. The posterior of that parameter lives on a fixed grid, so the
/// inner expectation of each action is a weighted sum over a utility table.
/// Perfect (degenerate) observations skip the grid and evaluate at `z`.
///
/// The prior term uses the same inner expectations: by the tower property
/// their mean over outer samples estimates `E_theta[u(a, theta)]`, and the
/// prior-optimal action is the argmax of those means. The reported prior
/// solution is tagged [`Backend::Preposterior`] for that reason.
pub fn evii(problem: &DecisionProblem, measurement: &MeasurementModel, config: &EstimatorConfig) -> Result<VoiReport> {
    evii_with_table(problem, measurement, config).map(|(r, _)| r)
}

/// [`evii`] plus the utility table it used (absent for the direct method).
pub fn evii_with_table(
    problem: &DecisionProblem,
    measurement: &MeasurementModel,
    config: &EstimatorConfig,
) -> Result<(VoiReport, Option<UtilityTable>)> {
    let setup = Setup::new(problem, measurement, config)?;
    let table = match config.evii_method {
        EviiMethod::Table => Some(setup.table(config)?),
        EviiMethod::Direct => None,
    };
    let n_actions = problem.actions.len();
    let n_points = setup.grid.len();
    let seed = config.seed;

    let chunks = map_chunks(config, config.n_samples, |range| {
        let mut acc = PassSummary::empty(n_actions, Backend::Preposterior);
        let mut weights = Vec::with_capacity(n_points);
        let mut expect = vec![0.0; n_actions];
        let mut column = vec![0.0; n_actions];
        for i in range {
            let (theta, redraws) = draw_prior(&problem.schema, seed, i)?;
            acc.redraws += redraws;
            let truth = theta[setup.target];
            let lik = measurement.likelihood(truth);
            let z = lik.sample(&mut stream(seed, Domain::Observation, i));
            if let DistributionSpec::Degenerate { .. } = lik {
                setup.inner(z, seed, Domain::NuisanceOuter, i, i as usize, &mut expect)?;
            } else {
                setup
                    .grid
                    .weights_into(|t| measurement.likelihood(t).ln_density(z), z, &mut weights)?;
                expect.iter_mut().for_each(|v| *v = 0.0);
                match &table {
                    Some(t) => {
                        for (a, e) in expect.iter_mut().enumerate() {
                            *e = t.values[a].iter().zip(&weights).map(|(u, w)| u * w).sum();
                        }
                    }
                    None => {
                        for (k, (&point, &w)) in setup.grid.points().iter().zip(&weights).enumerate() {
                            let key = i * n_points as u64 + k as u64;
                            setup.inner(point, seed, Domain::NuisanceOuter, key, i as usize, &mut column)?;
                            for (e, c) in expect.iter_mut().zip(&column) {
                                *e += w * c;
                            }
                        }
                    }
                }
            }
            acc.push(&expect, 1.0);
        }
        Ok(acc)
    })?;
    let summary = tree_reduce(chunks, PassSummary::merge)
        .unwrap_or_else(|| PassSummary::empty(n_actions, Backend::Preposterior));
    let prior = summary.prior_solution(problem);
    let regret = &summary.regret[prior.best_action];
    let report = VoiReport {
        kind: VoiKind::Evii,
        value: regret.mean,
        standard_error: regret.standard_error(),
        posterior_action_frequency: summary.frequencies(problem),
        prior,
        measurement_label: None,
        measurement_cost: None,
        net_benefit: None,
    }
    .with_cost(Some(&measurement.label), measurement.cost);
    Ok((report, table))
}
