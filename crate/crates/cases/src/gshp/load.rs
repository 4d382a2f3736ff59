use serde::{Deserialize, Serialize};

use crate::error::CaseError;

pub const MONTH_DAYS: [f64; 12] = [31.0, 28.0, 31.0, 30.0, 31.0, 30.0, 31.0, 31.0, 30.0, 31.0, 30.0, 31.0];

/// Monthly outdoor climatology used to shape the heating demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Climatology {
    /// Mean outdoor air temperature per calendar month, °C (London).
    pub monthly_mean_temp: [f64; 12],
    /// Heating is needed below this outdoor temperature, °C.
    pub balance_temp: f64,
}

impl Default for Climatology {
    fn default() -> Self {
        Self {
            monthly_mean_temp: [5.2, 5.3, 7.6, 9.9, 13.3, 16.5, 18.7, 18.5, 15.7, 12.0, 8.0, 5.5],
            balance_temp: 15.5,
        }
    }
}

/// Heating demand of one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadStep {
    pub index: usize,
    /// kWh over the step.
    pub demand_kwh: f64,
    pub hours: f64,
    /// Design peak power within the step, kW.
    pub peak_power_kw: f64,
}

impl LoadStep {
    pub fn mean_power_kw(&self) -> f64 {
        self.demand_kwh / self.hours
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub steps: Vec<LoadStep>,
}

impl LoadProfile {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_kwh(&self) -> f64 {
        self.steps.iter().map(|s| s.demand_kwh).sum()
    }

    pub fn max_peak_kw(&self) -> f64 {
        self.steps.iter().map(|s| s.peak_power_kw).fold(0.0, f64::max)
    }
}

/// Monthly demand proportional to heating degree-days, normalised to
/// `annual_kwh`, repeated for `years`. Each month's peak power scales its
/// mean power so the coldest month peaks at `peak_kw`.
pub fn synth_load_profile(
    climate: &Climatology,
    annual_kwh: f64,
    peak_kw: f64,
    years: usize,
) -> Result<LoadProfile, CaseError> {
    let degree_days: Vec<f64> = climate
        .monthly_mean_temp
        .iter()
        .zip(MONTH_DAYS)
        .map(|(t, d)| (climate.balance_temp - t).max(0.0) * d)
        .collect();
    let total: f64 = degree_days.iter().sum();
    if annual_kwh > 0.0 && !(total > 0.0) {
        return Err(CaseError::Config(
            "gshp: climatology has no heating degree-days but the annual load is positive".into(),
        ));
    }
    let demand: Vec<f64> = degree_days
        .iter()
        .map(|dd| if total > 0.0 { dd / total * annual_kwh } else { 0.0 })
        .collect();
    let mean_kw: Vec<f64> = demand.iter().zip(MONTH_DAYS).map(|(e, d)| e / (d * 24.0)).collect();
    let max_mean = mean_kw.iter().copied().fold(0.0, f64::max);
    let ratio = if max_mean > 0.0 { peak_kw / max_mean } else { 1.0 };
    let steps = (0..12 * years)
        .map(|i| LoadStep {
            index: i,
            demand_kwh: demand[i % 12],
            hours: MONTH_DAYS[i % 12] * 24.0,
            peak_power_kw: mean_kw[i % 12] * ratio,
        })
        .collect();
    Ok(LoadProfile { steps })
}
