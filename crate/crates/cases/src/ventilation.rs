//! Office ventilation scheduling under uncertain occupancy.
//!
//! Each day the operator picks an air-change rate. More ventilation costs
//! fan electricity; less ventilation raises the airborne infection risk and
//! with it the expected sick-leave cost borne by the tenant.

use serde::{Deserialize, Serialize};
use voi_core::{
    ActionSpace, DecisionProblem, DistributionSpec, Parameter, ParameterSchema, ProblemMetadata, Role,
    ScenarioSample, TimeBasis,
};

use crate::error::CaseError;

/// Wells–Riley dose-response parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfectionModelConfig {
    /// Infectious quanta emitted per infector, quanta/h.
    pub quanta_rate: f64,
    /// Breathing rate of a susceptible occupant, m³/h.
    pub breathing_rate: f64,
    /// Removal of infectious aerosol by means other than ventilation
    /// (deposition, inactivation), 1/h. Added to the air-change rate.
    pub removal_rate: f64,
}

impl Default for InfectionModelConfig {
    fn default() -> Self {
        Self {
            quanta_rate: 15.0,
            breathing_rate: 0.54,
            removal_rate: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfficeConfig {
    pub max_occupancy: i64,
    /// m².
    pub floor_area: f64,
    /// m.
    pub ceiling_height: f64,
    /// Air changes per hour, ascending.
    pub ach_options: Vec<f64>,
    /// W per l/s.
    pub fan_specific_power: f64,
    pub fan_efficiency: f64,
    /// h/day.
    pub fan_hours: f64,
    /// h/day.
    pub exposure_hours: f64,
    /// p/kWh.
    pub price: f64,
    /// Fraction of occupants who are infectious.
    pub prevalence: f64,
    pub sick_days: f64,
    /// GBP/day.
    pub daily_salary: f64,
    pub occupancy_prior: DistributionSpec,
    pub infection_model: InfectionModelConfig,
}

impl Default for OfficeConfig {
    fn default() -> Self {
        Self {
            max_occupancy: 100,
            floor_area: 1000.0,
            ceiling_height: 2.4,
            ach_options: vec![1.0, 3.0, 6.0, 12.0, 20.0],
            fan_specific_power: 1.9,
            fan_efficiency: 0.6,
            fan_hours: 10.0,
            exposure_hours: 8.0,
            price: 32.6,
            prevalence: 0.0218,
            sick_days: 3.0,
            daily_salary: 128.0,
            occupancy_prior: DistributionSpec::discrete_uniform(0, 100),
            infection_model: InfectionModelConfig::default(),
        }
    }
}

impl OfficeConfig {
    pub fn volume_m3(&self) -> f64 {
        self.floor_area * self.ceiling_height
    }

    pub fn validate(&self) -> Result<(), CaseError> {
        let bad = |m: &str| Err(CaseError::Config(format!("ventilation: {m}")));
        let positive = [
            ("floor_area", self.floor_area),
            ("ceiling_height", self.ceiling_height),
            ("fan_specific_power", self.fan_specific_power),
            ("fan_efficiency", self.fan_efficiency),
            ("fan_hours", self.fan_hours),
            ("exposure_hours", self.exposure_hours),
            ("price", self.price),
            ("sick_days", self.sick_days),
            ("daily_salary", self.daily_salary),
            ("infection_model.quanta_rate", self.infection_model.quanta_rate),
            ("infection_model.breathing_rate", self.infection_model.breathing_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(self.infection_model.removal_rate >= 0.0) {
            return bad("infection_model.removal_rate must be non-negative");
        }
        if self.max_occupancy < 1 {
            return bad("max_occupancy must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.prevalence) {
            return bad("prevalence must lie in [0, 1]");
        }
        if self.ach_options.is_empty() {
            return bad("ach_options is empty");
        }
        if self.ach_options.iter().any(|&a| !(a > 0.0)) {
            return bad("ach_options must be positive");
        }
        if self.ach_options.windows(2).any(|w| w[0] >= w[1]) {
            return bad("ach_options must be strictly ascending");
        }
        if let Err(e) = self.occupancy_prior.validate() {
            return bad(&format!("occupancy_prior: {e}"));
        }
        Ok(())
    }
}

/// Fan electricity cost of running at `ach` for one day, GBP/day.
pub fn ventilation_cost(ach: f64, cfg: &OfficeConfig) -> f64 {
    let flow_l_s = ach * cfg.volume_m3() * 1000.0 / 3600.0;
    let power_w = flow_l_s * cfg.fan_specific_power / cfg.fan_efficiency;
    let energy_kwh = power_w * cfg.fan_hours / 1000.0;
    energy_kwh * cfg.price / 100.0
}

/// Daily infection probability of one susceptible occupant when `n` people
/// are in the office.
pub fn infection_probability(n: f64, ach: f64, cfg: &OfficeConfig) -> f64 {
    let m = &cfg.infection_model;
    let infectors = n * cfg.prevalence;
    let clearance = (ach + m.removal_rate) * cfg.volume_m3();
    let dose = infectors * m.quanta_rate * m.breathing_rate * cfg.exposure_hours / clearance;
    -(-dose).exp_m1()
}

/// Fan cost plus the expected sick-leave cost of the day, GBP/day.
pub fn ventilation_total_cost(ach: f64, n: f64, cfg: &OfficeConfig) -> f64 {
    let illness = n * infection_probability(n, ach, cfg) * cfg.sick_days * cfg.daily_salary;
    ventilation_cost(ach, cfg) + illness
}

pub fn build_ventilation_problem(cfg: &OfficeConfig) -> Result<DecisionProblem, CaseError> {
    cfg.validate()?;
    let actions = ActionSpace::new("ach", cfg.ach_options.iter().map(|&a| (format!("{a} ACH"), a)));
    let schema = ParameterSchema::new(vec![Parameter::new(
        "occupancy",
        "persons",
        cfg.occupancy_prior.clone(),
        Role::Measured,
    )]);
    let c = cfg.clone();
    Ok(DecisionProblem::new(
        ProblemMetadata {
            name: "ventilation".into(),
            currency: "GBP".into(),
            time_basis: TimeBasis::PerDay,
        },
        actions,
        schema,
        move |a: usize, s: &ScenarioSample| Ok(-ventilation_total_cost(c.ach_options[a], s[0], &c)),
    ))
}

/// Floor area per person values swept by default, m²/person.
pub const FLOOR_AREA_VALUES: [f64; 5] = [5.0, 10.0, 15.0, 20.0, 25.0];

/// Prevalence values swept by default.
pub const INFECTION_RATE_VALUES: [f64; 6] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05];

/// Problem with the floor area set to `area_per_person` m² per person at
/// maximum occupancy.
pub fn floor_area_family(base: &OfficeConfig, area_per_person: f64) -> Result<DecisionProblem, CaseError> {
    let cfg = OfficeConfig {
        floor_area: area_per_person * base.max_occupancy as f64,
        ..base.clone()
    };
    build_ventilation_problem(&cfg)
}

/// Problem with the prevalence of infection set to `prevalence`.
pub fn infection_rate_family(base: &OfficeConfig, prevalence: f64) -> Result<DecisionProblem, CaseError> {
    build_ventilation_problem(&OfficeConfig {
        prevalence,
        ..base.clone()
    })
}
