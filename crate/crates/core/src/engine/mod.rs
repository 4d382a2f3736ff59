//! Estimators for the prior decision problem and the value of information.
//!
//! All estimators share one θ sample set across actions (common random
//! numbers). Work is split into fixed-size chunks of sample indices, each
//! chunk draws from counter-based streams keyed by sample index, and chunk
//! results are merged as a balanced tree in chunk order. Results are
//! therefore bit-identical for any worker count.

mod evii;
mod outcome;
mod pass;
mod sweep;

pub use evii::{evii, evii_with_table, utility_table, UtilityTable};
pub use outcome::{outcome_distribution, Histogram, Quantile, QUANTILE_LEVELS};
pub use sweep::{sensitivity_sweep, SweepAnalysis, SweepRow};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VoiError};
use crate::inference::GridSpec;
use crate::problem::{DecisionProblem, MeasurementModel};

/// Largest joint outcome count the automatic backend will enumerate.
pub const MAX_ENUMERATION: u64 = 10_000_000;

/// Samples per work item.
pub(crate) const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Exact enumeration when every prior has finite support and the joint
    /// outcome count is at most [`MAX_ENUMERATION`]; Monte Carlo otherwise.
    #[default]
    Auto,
    MonteCarlo,
    Exact,
    /// Prior expectations recovered from the pre-posterior inner
    /// expectations of an EVII run.
    Preposterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EviiMethod {
    /// Utility table over the posterior grid, computed once per analysis.
    #[default]
    Table,
    /// Re-evaluates the utility on the grid for every outer sample.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub n_samples: u64,
    pub seed: u64,
    /// Quadrature grid for posteriors of the measured parameter; its
    /// `n_points` is the inner quadrature resolution.
    pub posterior_grid: GridSpec,
    /// Nuisance draws averaged per grid point in EVII inner expectations.
    pub nuisance_draws: usize,
    pub workers: usize,
    pub backend: Backend,
    pub evii_method: EviiMethod,
    pub histogram_bins: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 42,
            posterior_grid: GridSpec::default(),
            nuisance_draws: 64,
            workers: 1,
            backend: Backend::Auto,
            evii_method: EviiMethod::Table,
            histogram_bins: 50,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(VoiError::InvalidConfig(m.to_string()));
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.nuisance_draws == 0 {
            return bad("nuisance_draws must be at least 1");
        }
        if self.histogram_bins == 0 {
            return bad("histogram_bins must be at least 1");
        }
        if self.backend == Backend::Preposterior {
            return bad("preposterior is a report tag, not a selectable backend");
        }
        self.posterior_grid.validate()
    }

    pub(crate) fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        if self.workers == 1 {
            return Ok(job());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| VoiError::InvalidConfig(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(job))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionStat {
    pub action: usize,
    pub label: String,
    pub payload: f64,
    pub mean: f64,
    pub standard_error: f64,
}

/// Solution of `max_a E_theta[u(a, theta)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSolution {
    pub best_action: usize,
    pub best_label: String,
    pub expected_utility: f64,
    pub standard_error: f64,
    pub per_action: Vec<ActionStat>,
    pub backend: Backend,
    /// Monte Carlo samples, or enumerated outcomes for the exact backend.
    pub n_samples: u64,
    /// Prior draws rejected at a parameter's redraw ceiling.
    pub redraws: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VoiKind {
    Evpi,
    Evii,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionFrequency {
    pub action: usize,
    pub label: String,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiReport {
    pub kind: VoiKind,
    pub value: f64,
    pub standard_error: f64,
    pub prior: PriorSolution,
    /// How often each action is optimal once the information is in hand.
    pub posterior_action_frequency: Vec<ActionFrequency>,
    pub measurement_label: Option<String>,
    pub measurement_cost: Option<f64>,
    pub net_benefit: Option<f64>,
}

impl VoiReport {
    /// Attaches the net benefit of paying `cost` for this information.
    pub fn with_cost(mut self, label: Option<&str>, cost: f64) -> Self {
        if let Some(l) = label {
            self.measurement_label = Some(l.to_string());
        }
        self.measurement_cost = Some(cost);
        self.net_benefit = Some(self.value - cost);
        self
    }

    pub fn frequency_of(&self, action: usize) -> f64 {
        self.posterior_action_frequency
            .iter()
            .find(|f| f.action == action)
            .map_or(0.0, |f| f.fraction)
    }
}

/// `max_a E[u(a, theta)]` over one common sample set.
pub fn solve_prior(problem: &DecisionProblem, config: &EstimatorConfig) -> Result<PriorSolution> {
    Ok(pass::utility_pass(problem, config)?.prior_solution(problem))
}

/// Expected value of perfect information, estimated as the mean per-sample
/// regret `max_a u(a, theta_i) - u(a*, theta_i)` of the prior-optimal
/// action `a*` on the same samples.
pub fn evpi(problem: &DecisionProblem, config: &EstimatorConfig) -> Result<VoiReport> {
    let summary = pass::utility_pass(problem, config)?;
    let prior = summary.prior_solution(problem);
    let regret = &summary.regret[prior.best_action];
    Ok(VoiReport {
        kind: VoiKind::Evpi,
        value: regret.mean,
        standard_error: if prior.backend == Backend::Exact { 0.0 } else { regret.standard_error() },
        posterior_action_frequency: summary.frequencies(problem),
        prior,
        measurement_label: None,
        measurement_cost: None,
        net_benefit: None,
    })
}

/// EVII minus the measurement cost.
pub fn net_benefit(report: &VoiReport, measurement: &MeasurementModel) -> Result<f64> {
    if report.kind != VoiKind::Evii {
        return Err(VoiError::InvalidConfig("net benefit of a measurement needs an EVII report".into()));
    }
    Ok(report.value - measurement.cost)
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}
