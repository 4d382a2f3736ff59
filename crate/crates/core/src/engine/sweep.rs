use serde::{Deserialize, Serialize};

use super::{evpi, solve_prior, EstimatorConfig};
use crate::error::{Result, VoiError};
use crate::problem::DecisionProblem;
use crate::rng::sub_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAnalysis {
    Prior,
    Evpi,
}

/// One value of the swept input. A row whose problem could not be built or
/// solved carries the error in `status` and no results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    /// `"ok"` or the error message.
    pub status: String,
    pub best_action: Option<usize>,
    pub best_label: Option<String>,
    pub best_payload: Option<f64>,
    pub expected_utility: Option<f64>,
    pub standard_error: Option<f64>,
    pub evpi: Option<f64>,
    pub evpi_standard_error: Option<f64>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Re-solves the problem built by `factory` at each value. Row `i` uses the
/// sub-seed `i` of the configured seed, so rows are independent of each
/// other and of the order in which they run.
pub fn sensitivity_sweep<F>(
    factory: F,
    values: &[f64],
    analysis: SweepAnalysis,
    config: &EstimatorConfig,
) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<DecisionProblem>,
{
    if values.is_empty() {
        return Err(VoiError::EmptySweep);
    }
    config.validate()?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let seed = sub_seed(config.seed, i as u64);
            let row_config = EstimatorConfig { seed, ..*config };
            let mut row = SweepRow {
                value,
                seed,
                status: "ok".into(),
                best_action: None,
                best_label: None,
                best_payload: None,
                expected_utility: None,
                standard_error: None,
                evpi: None,
                evpi_standard_error: None,
            };
            let outcome = factory(value).and_then(|problem| match analysis {
                SweepAnalysis::Prior => solve_prior(&problem, &row_config).map(|p| (p, None)),
                SweepAnalysis::Evpi => evpi(&problem, &row_config).map(|r| {
                    let v = (r.value, r.standard_error);
                    (r.prior, Some(v))
                }),
            });
            match outcome {
                Ok((prior, voi)) => {
                    let best = &prior.per_action[prior.best_action];
                    row.best_action = Some(prior.best_action);
                    row.best_label = Some(prior.best_label.clone());
                    row.best_payload = Some(best.payload);
                    row.expected_utility = Some(prior.expected_utility);
                    row.standard_error = Some(prior.standard_error);
                    row.evpi = voi.map(|v| v.0);
                    row.evpi_standard_error = voi.map(|v| v.1);
                }
                Err(e) => row.status = e.to_string(),
            }
            row
        })
        .collect())
}
