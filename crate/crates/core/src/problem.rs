//! Decision problems: actions, uncertain parameters, utility.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Result, VoiError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub index: usize,
    pub label: String,
    /// Numeric setting this action stands for (maintenance count, ACH,
    /// borehole length, ...), in `unit`.
    pub payload: f64,
    pub unit: String,
}

/// Ordered, finite set of actions. Iteration order is index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    actions: Vec<Action>,
}

impl ActionSpace {
    /// Actions from `(label, payload)` pairs, indexed in the given order.
    pub fn new<S: Into<String>>(unit: &str, items: impl IntoIterator<Item = (S, f64)>) -> Self {
        let actions = items
            .into_iter()
            .enumerate()
            .map(|(index, (label, payload))| Action {
                index,
                label: label.into(),
                payload,
                unit: unit.to_string(),
            })
            .collect();
        Self { actions }
    }

    /// Actions taken verbatim, indices included. Used to check externally
    /// supplied action lists.
    pub fn from_actions(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Action> {
        self.actions.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Action> {
        self.actions.iter()
    }

    pub fn find(&self, label: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.label == label)
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.actions.is_empty() {
            out.push("action space is empty".to_string());
        }
        if self.actions.iter().enumerate().any(|(i, a)| a.index != i) {
            out.push("action indices must be contiguous 0..n-1".to_string());
        }
        let mut seen = HashSet::new();
        for a in &self.actions {
            if !seen.insert(a.label.as_str()) {
                out.push(format!("labels unique: duplicate action label `{}`", a.label));
            }
            if !a.payload.is_finite() {
                out.push(format!("action `{}` has a non-finite payload", a.label));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Measured,
    Nuisance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub distribution: DistributionSpec,
    pub role: Role,
    pub unit: String,
    /// Draws at or above this value are rejected and redrawn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<f64>,
}

impl Parameter {
    pub fn new(name: &str, unit: &str, distribution: DistributionSpec, role: Role) -> Self {
        Self {
            name: name.to_string(),
            distribution,
            role,
            unit: unit.to_string(),
            ceiling: None,
        }
    }

    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = Some(ceiling);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchema {
    params: Vec<Parameter>,
}

impl ParameterSchema {
    pub fn new(params: Vec<Parameter>) -> Self {
        Self { params }
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Parameter> {
        self.params.iter()
    }

    pub fn get(&self, index: usize) -> Option<&Parameter> {
        self.params.get(index)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// True when every parameter has finite support; returns the number of
    /// joint outcomes in that case.
    pub fn joint_outcomes(&self) -> Option<u64> {
        self.params.iter().try_fold(1u64, |acc, p| {
            let n = p.distribution.support_size()?;
            let kept = match p.ceiling {
                Some(c) => p.distribution.finite_support()?.iter().filter(|(x, _)| *x < c).count() as u64,
                None => n,
            };
            acc.checked_mul(kept)
        })
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for p in &self.params {
            if !seen.insert(p.name.as_str()) {
                out.push(format!("parameter names unique: duplicate `{}`", p.name));
            }
            if let Err(e) = p.distribution.validate() {
                out.push(format!("parameter `{}`: {e}", p.name));
            }
            if let Some(c) = p.ceiling {
                if !(c > p.distribution.support().0) {
                    out.push(format!("parameter `{}`: redraw ceiling {c} excludes the whole support", p.name));
                }
            }
        }
        out
    }
}

/// One realization of the parameter vector, in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSample {
    values: Vec<f64>,
}

impl ScenarioSample {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Builds a sample from named values; names must match the schema
    /// exactly.
    pub fn from_named(schema: &ParameterSchema, named: &BTreeMap<String, f64>) -> Result<Self> {
        for name in named.keys() {
            if schema.position(name).is_none() {
                return Err(VoiError::UnknownParameter(name.clone()));
            }
        }
        let values = schema
            .iter()
            .map(|p| named.get(&p.name).copied().ok_or_else(|| VoiError::MissingParameter(p.name.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }

    pub fn to_named(&self, schema: &ParameterSchema) -> BTreeMap<String, f64> {
        schema.iter().map(|p| p.name.clone()).zip(self.values.iter().copied()).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<usize> for ScenarioSample {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Utility `u(a, theta)`. Must be pure: the same inputs always give the
/// same output, from any thread.
pub trait Utility: Send + Sync {
    fn utility(&self, action: usize, sample: &ScenarioSample) -> std::result::Result<f64, String>;
}

impl<F> Utility for F
where
    F: Fn(usize, &ScenarioSample) -> std::result::Result<f64, String> + Send + Sync,
{
    fn utility(&self, action: usize, sample: &ScenarioSample) -> std::result::Result<f64, String> {
        self(action, sample)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeBasis {
    PerYear,
    PerDay,
    Lifetime,
}

impl TimeBasis {
    /// Suffix used in column names, e.g. `gbp_per_year`.
    pub fn unit_suffix(&self, currency: &str) -> String {
        let c = currency.to_lowercase();
        match self {
            TimeBasis::PerYear => format!("{c}_per_year"),
            TimeBasis::PerDay => format!("{c}_per_day"),
            TimeBasis::Lifetime => format!("{c}_lifetime"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMetadata {
    pub name: String,
    pub currency: String,
    pub time_basis: TimeBasis,
}

/// `{A, pi(theta), u(a, theta)}`.
#[derive(Clone)]
pub struct DecisionProblem {
    pub actions: ActionSpace,
    pub schema: ParameterSchema,
    pub metadata: ProblemMetadata,
    utility: Arc<dyn Utility>,
}

impl fmt::Debug for DecisionProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecisionProblem")
            .field("actions", &self.actions)
            .field("schema", &self.schema)
            .field("metadata", &self.metadata)
            .finish_non_exhaustive()
    }
}

impl DecisionProblem {
    pub fn new(
        metadata: ProblemMetadata,
        actions: ActionSpace,
        schema: ParameterSchema,
        utility: impl Utility + 'static,
    ) -> Self {
        Self {
            actions,
            schema,
            metadata,
            utility: Arc::new(utility),
        }
    }

    /// Utility with the failing sample index attached to any error.
    pub(crate) fn eval_at(&self, action: usize, sample: &ScenarioSample, index: usize) -> Result<f64> {
        let u = self.utility.utility(action, sample).map_err(|message| VoiError::Utility {
            action,
            sample: index,
            message,
        })?;
        if !u.is_finite() {
            return Err(VoiError::NonFiniteUtility { action, sample: index });
        }
        Ok(u)
    }

    /// Parameter-wise prior mean, with redraw ceilings respected.
    pub fn prior_mean_sample(&self) -> ScenarioSample {
        ScenarioSample::new(self.schema.iter().map(|p| clip_to_support(p, p.distribution.mean())).collect())
    }
}

fn clip_to_support(p: &Parameter, x: f64) -> f64 {
    let (lo, hi) = p.distribution.support();
    let mut x = x.clamp(lo, hi);
    if let Some(c) = p.ceiling {
        if x >= c {
            x = lo.max(c - 1e-9 * c.abs().max(1.0));
        }
    }
    x
}

/// `u(a, theta)` after checking the action index and sample shape.
pub fn evaluate_utility(problem: &DecisionProblem, action: usize, sample: &ScenarioSample) -> Result<f64> {
    if action >= problem.actions.len() {
        return Err(VoiError::UnknownAction {
            index: action,
            count: problem.actions.len(),
        });
    }
    if sample.len() != problem.schema.len() {
        return Err(VoiError::SampleShape {
            expected: problem.schema.len(),
            got: sample.len(),
        });
    }
    problem.eval_at(action, sample, 0)
}

/// Noisy observation of one parameter.
#[derive(Clone)]
pub struct MeasurementModel {
    pub target: String,
    pub label: String,
    /// Cost of acquiring the measurement, in the problem currency.
    pub cost: f64,
    likelihood: Arc<dyn Fn(f64) -> DistributionSpec + Send + Sync>,
}

impl fmt::Debug for MeasurementModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasurementModel")
            .field("target", &self.target)
            .field("label", &self.label)
            .field("cost", &self.cost)
            .finish_non_exhaustive()
    }
}

impl MeasurementModel {
    pub fn new(
        label: &str,
        target: &str,
        cost: f64,
        likelihood: impl Fn(f64) -> DistributionSpec + Send + Sync + 'static,
    ) -> Self {
        Self {
            target: target.to_string(),
            label: label.to_string(),
            cost,
            likelihood: Arc::new(likelihood),
        }
    }

    /// Distribution of the observation `z` given the true parameter value.
    pub fn likelihood(&self, theta: f64) -> DistributionSpec {
        (self.likelihood)(theta)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Probe points: the prior mean and every ±3 sd corner (axis points only
/// beyond ten parameters), clipped to each parameter's support.
fn probe_points(schema: &ParameterSchema) -> Vec<(String, ScenarioSample)> {
    let bounds: Vec<(f64, f64, f64)> = schema
        .iter()
        .map(|p| {
            let d = &p.distribution;
            let (lo, hi) = match d.finite_support() {
                Some(s) => (s[0].0, s[s.len() - 1].0),
                None => (d.mean() - 3.0 * d.std_dev(), d.mean() + 3.0 * d.std_dev()),
            };
            (clip_to_support(p, d.mean()), clip_to_support(p, lo), clip_to_support(p, hi))
        })
        .collect();
    let mean = ScenarioSample::new(bounds.iter().map(|b| b.0).collect());
    let mut out = vec![("prior mean".to_string(), mean.clone())];
    let k = bounds.len();
    if k <= 10 {
        for mask in 0..(1u32 << k) {
            let values = bounds
                .iter()
                .enumerate()
                .map(|(i, b)| if mask & (1 << i) != 0 { b.2 } else { b.1 })
                .collect();
            out.push((format!("corner {mask:0width$b}", width = k.max(1)), ScenarioSample::new(values)));
        }
    } else {
        for (i, b) in bounds.iter().enumerate() {
            for (tag, v) in [("-3sd", b.1), ("+3sd", b.2)] {
                let mut s = mean.clone();
                s.values_mut()[i] = v;
                out.push((format!("{} {tag}", schema.get(i).map_or("?", |p| &p.name)), s));
            }
        }
    }
    out
}

/// Checks the structural invariants of a problem and probes its utility
/// for finiteness and determinism.
pub fn validate_problem(problem: &DecisionProblem) -> ValidationReport {
    let mut violations = problem.actions.violations();
    violations.extend(problem.schema.violations());
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    for (name, sample) in probe_points(&problem.schema) {
        for action in problem.actions.iter() {
            match problem.utility.utility(action.index, &sample) {
                Ok(u) if u.is_finite() => {
                    let again = problem.utility.utility(action.index, &sample);
                    if again.map(f64::to_bits) != Ok(u.to_bits()) {
                        violations.push(format!("utility not deterministic for `{}` at probe {name}", action.label));
                    }
                }
                Ok(u) => violations.push(format!("utility is {u} for `{}` at probe {name}", action.label)),
                Err(e) => violations.push(format!("utility failed for `{}` at probe {name}: {e}", action.label)),
            }
        }
    }
    ValidationReport { violations }
}

/// Checks a measurement against a problem: the target exists and is
/// measured, the cost is non-negative, and the likelihood integrates to one
/// at parameter values across the prior.
pub fn validate_measurement(problem: &DecisionProblem, measurement: &MeasurementModel) -> ValidationReport {
    let mut violations = Vec::new();
    let Some(pos) = problem.schema.position(&measurement.target) else {
        violations.push(format!("measurement target `{}` is not a parameter", measurement.target));
        return ValidationReport { violations };
    };
    let param = problem.schema.get(pos).expect("position is valid");
    if param.role != Role::Measured {
        violations.push(format!("measurement target `{}` is not marked measured", measurement.target));
    }
    if !(measurement.cost.is_finite() && measurement.cost >= 0.0) {
        violations.push(format!("measurement cost must be non-negative, got {}", measurement.cost));
    }
    let d = &param.distribution;
    let thetas: Vec<f64> = match d.finite_support() {
        Some(s) => s.iter().map(|p| p.0).collect(),
        None => (-4..=4).map(|k| clip_to_support(param, d.mean() + 0.75 * k as f64 * d.std_dev())).collect(),
    };
    for theta in thetas {
        let lik = measurement.likelihood(theta);
        if let Err(e) = lik.validate() {
            violations.push(format!("likelihood at {theta}: {e}"));
            continue;
        }
        let total = match lik.finite_support() {
            Some(s) => s.iter().map(|p| p.1).sum(),
            None => {
                let (m, sd) = (lik.mean(), lik.std_dev());
                let (s_lo, s_hi) = lik.support();
                let (a, b) = ((m - 12.0 * sd).max(s_lo), (m + 12.0 * sd).min(s_hi));
                let n = 20_000;
                let h = (b - a) / n as f64;
                let inner: f64 = (1..n).map(|i| lik.density(a + i as f64 * h)).sum();
                h * (inner + 0.5 * (lik.density(a) + lik.density(b)))
            }
        };
        if (total - 1.0).abs() > 1e-6 {
            violations.push(format!("likelihood at {theta} integrates to {total}"));
        }
    }
    ValidationReport { violations }
}
