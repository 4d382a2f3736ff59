use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::load::LoadProfile;
use crate::error::CaseError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SECONDS_PER_HOUR: f64 = 3600.0;
/// Kernel timestep: a twelfth of a 365-day year.
pub const STEP_HOURS: f64 = 8760.0 / 12.0;

/// Exponential integral `E1(x)` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 1.0 {
        // power series
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let add = term / kf;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundModelConfig {
    /// °C.
    pub undisturbed_temp: f64,
    /// m²/s.
    pub thermal_diffusivity: f64,
    /// m.
    pub borehole_radius: f64,
    /// Borehole thermal resistance, m·K/W.
    pub borehole_resistance: f64,
    /// Length of the design-peak pulse checked against the fluid bounds, h.
    pub peak_duration_hours: f64,
}

impl Default for GroundModelConfig {
    fn default() -> Self {
        Self {
            undisturbed_temp: 12.0,
            thermal_diffusivity: 1e-6,
            borehole_radius: 0.075,
            borehole_resistance: 0.1,
            peak_duration_hours: 6.0,
        }
    }
}

/// Heat pump and auxiliary plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plant {
    pub cop_intercept: f64,
    pub cop_slope: f64,
    pub aux_cop: f64,
    /// Fluid temperature bounds, °C.
    pub fluid_min: f64,
    pub fluid_max: f64,
    pub n_boreholes: f64,
}

impl Plant {
    pub fn cop(&self, fluid_temp: f64) -> f64 {
        self.cop_intercept + self.cop_slope * fluid_temp
    }
}

/// Infinite-line-source response kernel, precomputed for a horizon.
#[derive(Debug, Clone)]
pub struct LineSource {
    cfg: GroundModelConfig,
    /// `step[k]` is `E1` after `k + 1` kernel steps.
    step: Vec<f64>,
    /// `step[1..]` in reverse order, so the response at the end of step `m`
    /// to increments `0..m` is a forward dot product with its last `m` values.
    reversed: Vec<f64>,
    peak: f64,
}

impl LineSource {
    pub fn new(cfg: &GroundModelConfig, steps: usize) -> Self {
        let arg = |seconds: f64| cfg.borehole_radius.powi(2) / (4.0 * cfg.thermal_diffusivity * seconds);
        let dt = STEP_HOURS * SECONDS_PER_HOUR;
        let step: Vec<f64> = (1..=steps).map(|k| exp_integral_e1(arg(k as f64 * dt))).collect();
        Self {
            cfg: cfg.clone(),
            reversed: step.iter().skip(1).rev().copied().collect(),
            step,
            peak: exp_integral_e1(arg(cfg.peak_duration_hours * SECONDS_PER_HOUR)),
        }
    }

    pub fn horizon(&self) -> usize {
        self.step.len()
    }
}

/// Dot product with eight independent partial sums (vectorisable; the
/// summation order is fixed, so results are reproducible).
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Ground extraction per metre, W/m, at which the heat pump delivers
/// exactly `demand_kw`. With fluid temperature `offset - q * slope` and a
/// COP linear in it, `q * total_m / 1000 * cop / (cop - 1) = demand_kw` is a
/// quadratic in `q`; the smaller root is the one with `cop > 1`.
fn demand_extraction(demand_kw: f64, total_m: f64, offset: f64, slope: f64, plant: &Plant) -> f64 {
    let c0 = plant.cop(offset);
    let d = plant.cop_slope * slope;
    let t = total_m / 1000.0;
    let b = t * c0 + demand_kw * d;
    let c = demand_kw * (c0 - 1.0);
    if d == 0.0 {
        return c / (t * c0);
    }
    let a = t * d;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    // stable form of (b - sqrt(disc)) / 2a
    2.0 * c / (b + disc.sqrt())
}

/// Energy flows of one timestep, kWh unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub demand: f64,
    /// Heat extracted from the ground.
    pub ground: f64,
    /// Heat delivered by the heat pump (ground heat plus compressor work).
    pub heat_pump: f64,
    /// Heat delivered by the auxiliary system.
    pub auxiliary: f64,
    pub electricity: f64,
    /// Mean fluid temperature over the step, °C.
    pub fluid_temp: f64,
    /// Fluid temperature at the end of the design-peak pulse, °C.
    pub peak_fluid_temp: f64,
    /// Ground extraction per metre of borehole, W/m.
    pub extraction_w_per_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GshpRun {
    pub electricity_kwh: f64,
    /// Lowest fluid temperature reached, including design peaks, °C.
    pub min_fluid_temp: f64,
    /// Share of the heat demand met by the auxiliary system.
    pub aux_fraction: f64,
    pub steps: Vec<StepRecord>,
}

/// Greedy dispatch over the load profile: each step extracts as much ground
/// heat as the demand and the minimum fluid temperature allow; the rest is
/// met by the auxiliary system. Both limits are solved in closed form: the
/// fluid temperature is linear in the extraction rate and the delivered heat
/// is a ratio of linear terms.
pub fn simulate_gshp(
    length_m: f64,
    conductivity: f64,
    load: &LoadProfile,
    kernel: &LineSource,
    plant: &Plant,
) -> Result<GshpRun, CaseError> {
    if !(conductivity > 0.0) {
        return Err(CaseError::Config(format!("gshp: ground conductivity {conductivity} must be positive")));
    }
    if !(length_m > 0.0) {
        return Err(CaseError::Config(format!("gshp: borehole length {length_m} must be positive")));
    }
    if load.len() > kernel.horizon() {
        return Err(CaseError::Config("gshp: load profile is longer than the kernel horizon".into()));
    }
    let g = &kernel.cfg;
    let total_m = plant.n_boreholes * length_m;
    let scale = 1.0 / (4.0 * PI * conductivity);
    // fluid temp = offset - q * slope
    let slope = kernel.step[0] * scale + g.borehole_resistance;
    let peak_slope = kernel.peak * scale + g.borehole_resistance;

    let mut increments: Vec<f64> = Vec::with_capacity(load.len());
    let mut prev_q = 0.0;
    let mut steps = Vec::with_capacity(load.len());
    let (mut electricity, mut aux, mut demand) = (0.0, 0.0, 0.0);
    let mut min_fluid = f64::INFINITY;

    for (m, s) in load.steps.iter().enumerate() {
        // Response at the end of step m to every earlier change of extraction.
        let history = dot(&increments, &kernel.reversed[kernel.reversed.len() - m..]);
        let offset = g.undisturbed_temp - (history - prev_q * kernel.step[0]) * scale;
        let fluid = |q: f64| offset - q * slope;
        let mean_kw = s.mean_power_kw();
        let peak_ratio = if mean_kw > 0.0 { s.peak_power_kw / mean_kw } else { 1.0 };
        let peak_fluid = |q: f64| fluid(q) - q * (peak_ratio - 1.0) * peak_slope;
        let q = if mean_kw <= 0.0 || offset < plant.fluid_min {
            0.0
        } else {
            let cap = (offset - plant.fluid_min) / (slope + (peak_ratio - 1.0) * peak_slope);
            demand_extraction(mean_kw, total_m, offset, slope, plant).min(cap)
        };
        let t_fluid = fluid(q);
        if t_fluid > plant.fluid_max {
            return Err(CaseError::InfeasibleDispatch { step: m });
        }
        let cop = plant.cop(t_fluid);
        let ground = q * total_m / 1000.0 * s.hours;
        let heat_pump = if q > 0.0 { ground / (1.0 - 1.0 / cop) } else { 0.0 };
        let auxiliary = s.demand_kwh - heat_pump;
        let elec = if q > 0.0 { heat_pump / cop } else { 0.0 } + auxiliary / plant.aux_cop;
        let t_peak = peak_fluid(q);
        min_fluid = min_fluid.min(t_peak);
        steps.push(StepRecord {
            demand: s.demand_kwh,
            ground,
            heat_pump,
            auxiliary,
            electricity: elec,
            fluid_temp: t_fluid,
            peak_fluid_temp: t_peak,
            extraction_w_per_m: q,
        });
        electricity += elec;
        aux += auxiliary;
        demand += s.demand_kwh;
        increments.push(q - prev_q);
        prev_q = q;
    }
    Ok(GshpRun {
        electricity_kwh: electricity,
        min_fluid_temp: if min_fluid.is_finite() { min_fluid } else { g.undisturbed_temp },
        aux_fraction: if demand > 0.0 { aux / demand } else { 0.0 },
        steps,
    })
}
