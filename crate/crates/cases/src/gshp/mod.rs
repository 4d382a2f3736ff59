//! Ground-source heat pump borehole sizing.
//!
//! The designer picks the borehole length of a 12-borehole field to
//! minimise drilling capital plus lifetime electricity. Ground thermal
//! conductivity is uncertain and can be measured by one of several ground
//! tests of differing precision and cost before the length is fixed.

mod ground;
mod load;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use voi_core::{
    ActionSpace, DecisionProblem, DistributionSpec, MeasurementModel, Parameter, ParameterSchema, ProblemMetadata,
    Role, ScenarioSample, TimeBasis,
};

pub use ground::{exp_integral_e1, simulate_gshp, GroundModelConfig, GshpRun, LineSource, Plant, StepRecord, STEP_HOURS};
pub use load::{synth_load_profile, Climatology, LoadProfile, LoadStep, MONTH_DAYS};

use crate::error::CaseError;

/// A ground thermal conductivity test: Gaussian error with standard
/// deviation `relative_uncertainty / 2` times the true conductivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTest {
    pub label: String,
    pub relative_uncertainty: f64,
    /// GBP.
    pub cost: f64,
}

impl GroundTest {
    fn new(label: &str, relative_uncertainty: f64, cost: f64) -> Self {
        Self {
            label: label.into(),
            relative_uncertainty,
            cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GshpConfig {
    /// Candidate borehole lengths, m, ascending.
    pub lengths: Vec<f64>,
    pub n_boreholes: u32,
    /// GBP per metre per borehole.
    pub drilling_cost: f64,
    /// W/(m·K).
    pub conductivity_prior: DistributionSpec,
    pub lifetime_years: u32,
    /// p/kWh.
    pub price: f64,
    /// Allowed fluid temperature range, °C.
    pub fluid_bounds: [f64; 2],
    pub cop_intercept: f64,
    /// Per °C of fluid temperature.
    pub cop_slope: f64,
    pub aux_cop: f64,
    /// kWh/year.
    pub annual_load: f64,
    /// kW.
    pub peak_load: f64,
    pub climatology: Climatology,
    pub ground_model: GroundModelConfig,
    pub ground_tests: Vec<GroundTest>,
}

impl Default for GshpConfig {
    fn default() -> Self {
        Self {
            lengths: (0..17).map(|i| 110.0 + 5.0 * f64::from(i)).collect(),
            n_boreholes: 12,
            drilling_cost: 70.0,
            conductivity_prior: DistributionSpec::gaussian(1.94, 0.31),
            lifetime_years: 50,
            price: 32.6,
            fluid_bounds: [5.0, 35.0],
            cop_intercept: 4.0279,
            cop_slope: 0.1319,
            aux_cop: 1.0,
            annual_load: 116_000.0,
            peak_load: 30.5,
            climatology: Climatology::default(),
            ground_model: GroundModelConfig::default(),
            ground_tests: vec![
                GroundTest::new("probe-in-situ", 0.25, 187.0),
                GroundTest::new("probe-lab", 0.17, 1800.0),
                GroundTest::new("trt", 0.10, 5000.0),
                GroundTest::new("extended-trt", 0.05, 10_000.0),
            ],
        }
    }
}

impl GshpConfig {
    pub fn validate(&self) -> Result<(), CaseError> {
        let bad = |m: &str| Err(CaseError::Config(format!("gshp: {m}")));
        if self.lengths.is_empty() || self.lengths.iter().any(|&l| !(l > 0.0)) {
            return bad("lengths must be non-empty and positive");
        }
        if self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return bad("lengths must be strictly ascending");
        }
        if self.n_boreholes == 0 || self.lifetime_years == 0 {
            return bad("n_boreholes and lifetime_years must be at least 1");
        }
        if let Err(e) = self.conductivity_prior.validate() {
            return bad(&format!("conductivity_prior: {e}"));
        }
        if self.conductivity_prior.std_dev() <= 0.0 {
            return bad("conductivity_prior must have positive spread");
        }
        let [lo, hi] = self.fluid_bounds;
        if !(lo < hi) {
            return bad("fluid_bounds must be ordered");
        }
        if !(self.cop_intercept + self.cop_slope * lo > 1.0) || self.cop_slope < 0.0 {
            return bad("heat pump COP must exceed 1 throughout the fluid range and not fall with temperature");
        }
        if !(self.aux_cop > 0.0) {
            return bad("aux_cop must be positive");
        }
        if !(self.drilling_cost >= 0.0) || !(self.price >= 0.0) {
            return bad("costs must be non-negative");
        }
        if !(self.annual_load >= 0.0) || !(self.peak_load >= 0.0) {
            return bad("loads must be non-negative");
        }
        let g = &self.ground_model;
        for (name, v) in [
            ("thermal_diffusivity", g.thermal_diffusivity),
            ("borehole_radius", g.borehole_radius),
            ("borehole_resistance", g.borehole_resistance),
            ("peak_duration_hours", g.peak_duration_hours),
        ] {
            if !(v > 0.0) {
                return bad(&format!("ground_model.{name} must be positive"));
            }
        }
        if !g.undisturbed_temp.is_finite() {
            return bad("ground_model.undisturbed_temp must be finite");
        }
        for t in &self.ground_tests {
            if !(t.relative_uncertainty >= 0.0) || !(t.cost >= 0.0) {
                return bad(&format!("ground test `{}` needs non-negative uncertainty and cost", t.label));
            }
        }
        Ok(())
    }

    pub fn plant(&self) -> Plant {
        Plant {
            cop_intercept: self.cop_intercept,
            cop_slope: self.cop_slope,
            aux_cop: self.aux_cop,
            fluid_min: self.fluid_bounds[0],
            fluid_max: self.fluid_bounds[1],
            n_boreholes: f64::from(self.n_boreholes),
        }
    }
}

/// Load profile, kernel and plant shared by every simulation of a problem.
#[derive(Debug, Clone)]
pub struct GshpModel {
    pub config: GshpConfig,
    pub load: LoadProfile,
    pub kernel: LineSource,
    pub plant: Plant,
}

impl GshpModel {
    pub fn new(config: &GshpConfig) -> Result<Self, CaseError> {
        config.validate()?;
        let load = synth_load_profile(
            &config.climatology,
            config.annual_load,
            config.peak_load,
            config.lifetime_years as usize,
        )?;
        Ok(Self {
            kernel: LineSource::new(&config.ground_model, load.len()),
            plant: config.plant(),
            load,
            config: config.clone(),
        })
    }

    pub fn simulate(&self, length_m: f64, conductivity: f64) -> Result<GshpRun, CaseError> {
        simulate_gshp(length_m, conductivity, &self.load, &self.kernel, &self.plant)
    }

    pub fn capital_cost(&self, length_m: f64) -> f64 {
        self.config.drilling_cost * length_m * f64::from(self.config.n_boreholes)
    }

    /// Drilling capital plus lifetime electricity, GBP.
    pub fn lifetime_cost(&self, length_m: f64, conductivity: f64) -> Result<f64, CaseError> {
        let run = self.simulate(length_m, conductivity)?;
        Ok(self.capital_cost(length_m) + run.electricity_kwh * self.config.price / 100.0)
    }
}

pub fn gshp_lifetime_cost(length_m: f64, conductivity: f64, config: &GshpConfig) -> Result<f64, CaseError> {
    GshpModel::new(config)?.lifetime_cost(length_m, conductivity)
}

/// Likelihood of a ground test with relative uncertainty `nu`.
pub fn ground_test_likelihood(nu: f64, conductivity: f64) -> DistributionSpec {
    if nu == 0.0 {
        DistributionSpec::degenerate(conductivity)
    } else {
        DistributionSpec::gaussian(conductivity, nu / 2.0 * conductivity)
    }
}

pub fn ground_test_measurements(config: &GshpConfig) -> Vec<MeasurementModel> {
    config
        .ground_tests
        .iter()
        .map(|t| {
            let nu = t.relative_uncertainty;
            MeasurementModel::new(&t.label, "conductivity", t.cost, move |l| ground_test_likelihood(nu, l))
        })
        .collect()
}

pub fn build_gshp_problem(config: &GshpConfig) -> Result<DecisionProblem, CaseError> {
    let model = Arc::new(GshpModel::new(config)?);
    let actions = ActionSpace::new("m", config.lengths.iter().map(|&l| (format!("{l} m"), l)));
    let schema = ParameterSchema::new(vec![Parameter::new(
        "conductivity",
        "W/mK",
        config.conductivity_prior.clone(),
        Role::Measured,
    )]);
    Ok(DecisionProblem::new(
        ProblemMetadata {
            name: "gshp".into(),
            currency: "GBP".into(),
            time_basis: TimeBasis::Lifetime,
        },
        actions,
        schema,
        move |a: usize, s: &ScenarioSample| {
            model
                .lifetime_cost(model.config.lengths[a], s[0])
                .map(|c| -c)
                .map_err(|e| e.to_string())
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> GshpModel {
        GshpModel::new(&GshpConfig::default()).unwrap()
    }

    #[test]
    fn capital_cost() {
        let m = model();
        assert_relative_eq!(m.capital_cost(155.0), 130_200.0, max_relative = 1e-15);
        assert_relative_eq!(m.capital_cost(190.0) - m.capital_cost(110.0), 67_200.0, max_relative = 1e-12);
    }

    #[test]
    fn energy_balance_every_step() {
        let m = model();
        for (l, k) in [(110.0, 1.0), (155.0, 1.94), (190.0, 3.0)] {
            let run = m.simulate(l, k).unwrap();
            assert_eq!(run.steps.len(), 600);
            for s in &run.steps {
                assert!(((s.heat_pump + s.auxiliary) - s.demand).abs() <= 1e-9 * s.demand.max(1.0));
                assert!(s.heat_pump <= s.demand * (1.0 + 1e-12));
                assert!(s.peak_fluid_temp >= 5.0 - 1e-9 || s.extraction_w_per_m == 0.0);
                assert!(s.fluid_temp <= 35.0);
            }
        }
    }

    #[test]
    fn better_ground_never_costs_more() {
        let m = model();
        for &l in &[110.0, 150.0, 190.0] {
            let lo = m.simulate(l, 1.0).unwrap();
            let hi = m.simulate(l, 2.0).unwrap();
            assert!(hi.min_fluid_temp >= lo.min_fluid_temp);
            assert!(hi.electricity_kwh <= lo.electricity_kwh);
        }
    }

    #[test]
    fn longer_boreholes_need_less_auxiliary() {
        let m = model();
        let short = m.simulate(110.0, 1.94).unwrap();
        let long = m.simulate(190.0, 1.94).unwrap();
        assert!(long.aux_fraction <= short.aux_fraction);
        assert!((0.0..=1.0).contains(&short.aux_fraction));
    }

    #[test]
    fn zero_load_uses_no_electricity() {
        let cfg = GshpConfig {
            annual_load: 0.0,
            peak_load: 0.0,
            ..Default::default()
        };
        let run = GshpModel::new(&cfg).unwrap().simulate(150.0, 1.94).unwrap();
        assert_eq!(run.electricity_kwh, 0.0);
        assert_eq!(run.aux_fraction, 0.0);
        assert_eq!(run.min_fluid_temp, 12.0);
    }

    #[test]
    fn measurement_menu() {
        let ms = ground_test_measurements(&GshpConfig::default());
        let labels: Vec<&str> = ms.iter().map(|m| m.label.as_str()).collect();
        assert_eq!(labels, ["probe-in-situ", "probe-lab", "trt", "extended-trt"]);
        let costs: Vec<f64> = ms.iter().map(|m| m.cost).collect();
        assert_eq!(costs, [187.0, 1800.0, 5000.0, 10_000.0]);
        assert_eq!(ms[2].likelihood(2.0), DistributionSpec::gaussian(2.0, 0.1));
        assert_eq!(ground_test_likelihood(0.0, 2.0), DistributionSpec::degenerate(2.0));
    }

    #[test]
    fn problem_shape() {
        let p = build_gshp_problem(&GshpConfig::default()).unwrap();
        assert_eq!(p.actions.len(), 17);
        assert_eq!(p.actions.get(9).unwrap().payload, 155.0);
        assert!(voi_core::validate_problem(&p).is_ok());
    }

    #[test]
    fn invalid_configs() {
        let c = GshpConfig { fluid_bounds: [35.0, 5.0], ..Default::default() };
        assert!(c.validate().is_err());
        let c = GshpConfig { lengths: vec![120.0, 110.0], ..Default::default() };
        assert!(build_gshp_problem(&c).is_err());
        let m = model();
        assert!(m.simulate(150.0, 0.0).is_err());
    }
}
