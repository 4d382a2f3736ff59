//! Air-source heat pump maintenance scheduling.
//!
//! The asset owner picks the number of evenly spaced maintenance activities
//! per year, `N_m in 0..=12`, to minimise next year's operating cost:
//! electricity for the heating load at the degraded-and-maintained seasonal
//! performance factor, plus the cost of the maintenance visits.

use serde::{Deserialize, Serialize};
use voi_core::{
    ActionSpace, DecisionProblem, DistributionSpec, Parameter, ParameterSchema, ProblemMetadata, Role,
    ScenarioSample, TimeBasis,
};

use crate::error::CaseError;

/// Parameter order in the problem schema.
pub const PARAMETERS: [&str; 5] = ["heating_load", "electricity_price", "spf_base", "degradation", "maintenance_noise"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AshpParams {
    /// Annual heating load, GWh/year.
    pub load_prior: DistributionSpec,
    /// Electricity price, pence/kWh.
    pub price_prior: DistributionSpec,
    /// Undegraded seasonal performance factor.
    pub spf_base_prior: DistributionSpec,
    /// Fractional performance degradation.
    pub degradation_prior: DistributionSpec,
    /// Relative noise on the maintenance uplift.
    pub maint_noise_prior: DistributionSpec,
    pub beta_a: f64,
    pub beta_b: f64,
    pub gamma: f64,
    /// GBP per maintenance visit.
    pub maintenance_cost_per_activity: f64,
    /// Annualised smart meter cost, GBP/year.
    pub meter_cost_per_year: f64,
    pub max_maintenance: u32,
    /// Degradation draws at or above this value are redrawn.
    pub degradation_ceiling: f64,
}

impl Default for AshpParams {
    fn default() -> Self {
        Self {
            load_prior: DistributionSpec::gaussian(12.6, 1.36),
            price_prior: DistributionSpec::gaussian(32.6, 1.6),
            spf_base_prior: DistributionSpec::gaussian(2.9, 0.167),
            degradation_prior: DistributionSpec::truncated_below(0.01, 0.25, 0.0),
            maint_noise_prior: DistributionSpec::gaussian(0.0, 0.1),
            beta_a: 0.05,
            beta_b: 2.5,
            gamma: 1.4,
            maintenance_cost_per_activity: 18_000.0,
            meter_cost_per_year: 70.0,
            max_maintenance: 12,
            degradation_ceiling: 1.0,
        }
    }
}

impl AshpParams {
    pub fn validate(&self) -> Result<(), CaseError> {
        let bad = |m: &str| Err(CaseError::Config(format!("ashp: {m}")));
        for (name, d) in [
            ("load_prior", &self.load_prior),
            ("price_prior", &self.price_prior),
            ("spf_base_prior", &self.spf_base_prior),
            ("degradation_prior", &self.degradation_prior),
            ("maint_noise_prior", &self.maint_noise_prior),
        ] {
            if let Err(e) = d.validate() {
                return bad(&format!("{name}: {e}"));
            }
        }
        if !(self.beta_b > 0.0) {
            return bad("beta_b must be positive");
        }
        if !(self.gamma > 0.0) {
            return bad("gamma must be positive");
        }
        if !(self.beta_a.is_finite()) {
            return bad("beta_a must be finite");
        }
        if !(self.maintenance_cost_per_activity >= 0.0) || !(self.meter_cost_per_year >= 0.0) {
            return bad("costs must be non-negative");
        }
        if !(self.degradation_ceiling > 0.0) {
            return bad("degradation_ceiling must be positive");
        }
        Ok(())
    }
}

/// Uncertain inputs of one operating year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AshpScenario {
    /// GWh/year.
    pub heating_load: f64,
    /// pence/kWh.
    pub electricity_price: f64,
    pub spf_base: f64,
    pub degradation: f64,
    pub maintenance_noise: f64,
}

impl AshpScenario {
    fn from_sample(s: &ScenarioSample) -> Self {
        Self {
            heating_load: s[0],
            electricity_price: s[1],
            spf_base: s[2],
            degradation: s[3],
            maintenance_noise: s[4],
        }
    }
}

/// Fractional SPF improvement from `n` maintenance visits per year.
pub fn maintenance_uplift(n: u32, epsilon: f64, params: &AshpParams) -> f64 {
    let x = f64::from(n).powf(params.gamma);
    params.beta_a * x / (params.beta_b + x) * (1.0 + epsilon)
}

/// Annual electricity plus maintenance cost in GBP.
pub fn ashp_annual_cost(n: u32, theta: &AshpScenario, params: &AshpParams) -> Result<f64, CaseError> {
    let beta = maintenance_uplift(n, theta.maintenance_noise, params);
    let spf = theta.spf_base * (1.0 - theta.degradation) * (1.0 + beta);
    if !(spf > 0.0) {
        return Err(CaseError::NonPositiveSpf { spf });
    }
    let electricity_kwh = theta.heating_load * 1e6 / spf;
    let electricity_cost = electricity_kwh * theta.electricity_price / 100.0;
    Ok(electricity_cost + params.maintenance_cost_per_activity * f64::from(n))
}

pub fn build_ashp_problem(params: &AshpParams) -> Result<DecisionProblem, CaseError> {
    params.validate()?;
    let actions = ActionSpace::new(
        "activities_per_year",
        (0..=params.max_maintenance).map(|n| (format!("N_m={n}"), f64::from(n))),
    );
    let schema = ParameterSchema::new(vec![
        Parameter::new(PARAMETERS[0], "GWh/year", params.load_prior.clone(), Role::Measured),
        Parameter::new(PARAMETERS[1], "p/kWh", params.price_prior.clone(), Role::Measured),
        Parameter::new(PARAMETERS[2], "-", params.spf_base_prior.clone(), Role::Measured),
        Parameter::new(PARAMETERS[3], "-", params.degradation_prior.clone(), Role::Measured)
            .with_ceiling(params.degradation_ceiling),
        Parameter::new(PARAMETERS[4], "-", params.maint_noise_prior.clone(), Role::Measured),
    ]);
    let p = params.clone();
    Ok(DecisionProblem::new(
        ProblemMetadata {
            name: "ashp".into(),
            currency: "GBP".into(),
            time_basis: TimeBasis::PerYear,
        },
        actions,
        schema,
        move |a: usize, s: &ScenarioSample| {
            ashp_annual_cost(a as u32, &AshpScenario::from_sample(s), &p)
                .map(|c| -c)
                .map_err(|e| e.to_string())
        },
    ))
}
