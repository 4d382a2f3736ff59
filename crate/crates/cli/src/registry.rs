use serde::Serialize;
use voi_cases::ashp::build_ashp_problem;
use voi_cases::gshp::{build_gshp_problem, ground_test_measurements};
use voi_cases::ventilation::{
    build_ventilation_problem, floor_area_family, infection_rate_family, FLOOR_AREA_VALUES, INFECTION_RATE_VALUES,
};
use voi_cases::CaseError;
use voi_core::{DecisionProblem, MeasurementModel};

use crate::config::ConfigDocument;
use crate::error::CliError;

type Build = fn(&ConfigDocument) -> Result<DecisionProblem, CaseError>;
type Family = fn(&ConfigDocument, f64) -> Result<DecisionProblem, CaseError>;

/// A one-parameter family of problems for sensitivity sweeps.
pub struct SweepEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Unit suffix for CSV headers.
    pub unit: &'static str,
    pub values: &'static [f64],
    pub family: Family,
}

/// Cost of acquiring perfect information, reported as the EVPI net benefit.
pub struct PerfectInformation {
    pub label: &'static str,
    pub cost: fn(&ConfigDocument) -> f64,
}

pub struct ProblemEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub build: Build,
    pub measurements: fn(&ConfigDocument) -> Vec<MeasurementModel>,
    pub sweeps: Vec<SweepEntry>,
    pub perfect_information: Option<PerfectInformation>,
}

impl ProblemEntry {
    pub fn measurement(&self, config: &ConfigDocument, label: &str) -> Result<MeasurementModel, CliError> {
        let all = (self.measurements)(config);
        let names = all.iter().map(|m| m.label.clone()).collect();
        all.into_iter().find(|m| m.label == label).ok_or(CliError::UnknownName {
            kind: "measurement",
            name: label.to_string(),
            available: names,
        })
    }

    pub fn sweep(&self, name: &str) -> Option<&SweepEntry> {
        self.sweeps.iter().find(|s| s.name == name)
    }
}

fn no_measurements(_: &ConfigDocument) -> Vec<MeasurementModel> {
    Vec::new()
}

/// Registered problems in alphabetical order.
pub fn registry() -> Vec<ProblemEntry> {
    vec![
        ProblemEntry {
            name: "ashp",
            description: "air-source heat pump maintenance visits per year",
            build: |c| build_ashp_problem(&c.ashp),
            measurements: no_measurements,
            sweeps: Vec::new(),
            perfect_information: Some(PerfectInformation {
                label: "smart-meter",
                cost: |c| c.ashp.meter_cost_per_year,
            }),
        },
        ProblemEntry {
            name: "gshp",
            description: "ground-source heat pump borehole length",
            build: |c| build_gshp_problem(&c.gshp),
            measurements: |c| ground_test_measurements(&c.gshp),
            sweeps: Vec::new(),
            perfect_information: None,
        },
        ProblemEntry {
            name: "ventilation",
            description: "office air-change rate under uncertain occupancy",
            build: |c| build_ventilation_problem(&c.ventilation),
            measurements: no_measurements,
            sweeps: vec![
                SweepEntry {
                    name: "floor-area",
                    description: "floor area per person at full occupancy",
                    unit: "m2_per_person",
                    values: &FLOOR_AREA_VALUES,
                    family: |c, v| floor_area_family(&c.ventilation, v),
                },
                SweepEntry {
                    name: "infection-rate",
                    description: "prevalence of infection among occupants",
                    unit: "fraction",
                    values: &INFECTION_RATE_VALUES,
                    family: |c, v| infection_rate_family(&c.ventilation, v),
                },
            ],
            perfect_information: None,
        },
    ]
}

/// All names accepted by `--problem`: problems and `problem:sweep` pairs.
pub fn registered_names() -> Vec<String> {
    let mut names = Vec::new();
    for p in registry() {
        names.push(p.name.to_string());
        names.extend(p.sweeps.iter().map(|s| format!("{}:{}", p.name, s.name)));
    }
    names
}

/// Splits `problem[:sweep]` and looks the problem up.
pub fn lookup(name: &str) -> Result<(ProblemEntry, Option<&str>), CliError> {
    let (base, sweep) = match name.split_once(':') {
        Some((b, s)) => (b, Some(s)),
        None => (name, None),
    };
    let unknown = || CliError::UnknownName {
        kind: "problem",
        name: name.to_string(),
        available: registered_names(),
    };
    let entry = registry().into_iter().find(|p| p.name == base).ok_or_else(unknown)?;
    if let Some(s) = sweep {
        if entry.sweep(s).is_none() {
            return Err(unknown());
        }
    }
    Ok((entry, sweep))
}

#[derive(Debug, Clone, Serialize)]
pub struct ParameterListing {
    pub name: String,
    pub unit: String,
    pub role: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemListing {
    pub name: String,
    pub description: String,
    pub actions: usize,
    pub parameters: Vec<ParameterListing>,
    pub measurements: Vec<String>,
    pub sweeps: Vec<String>,
}

pub fn list_problems(config: &ConfigDocument) -> Result<Vec<ProblemListing>, CliError> {
    registry()
        .iter()
        .map(|p| {
            let problem = (p.build)(config)?;
            Ok(ProblemListing {
                name: p.name.into(),
                description: p.description.into(),
                actions: problem.actions.len(),
                parameters: problem
                    .schema
                    .iter()
                    .map(|q| ParameterListing {
                        name: q.name.clone(),
                        unit: q.unit.clone(),
                        role: format!("{:?}", q.role).to_lowercase(),
                    })
                    .collect(),
                measurements: (p.measurements)(config).into_iter().map(|m| m.label).collect(),
                sweeps: p.sweeps.iter().map(|s| format!("{}:{}", p.name, s.name)).collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_registry() {
        let names: Vec<&str> = registry().iter().map(|p| p.name).collect();
        assert_eq!(names, ["ashp", "gshp", "ventilation"]);
        let listing = list_problems(&ConfigDocument::default()).unwrap();
        assert_eq!(listing[1].measurements.len(), 4);
        assert_eq!(listing[2].sweeps, ["ventilation:floor-area", "ventilation:infection-rate"]);
        assert_eq!(listing[0].actions, 13);
        assert_eq!(listing[1].actions, 17);
        assert_eq!(listing[2].actions, 5);
    }

    #[test]
    fn lookup_names() {
        assert_eq!(lookup("ventilation:floor-area").unwrap().1, Some("floor-area"));
        assert!(lookup("gshp").unwrap().1.is_none());
        let Err(err) = lookup("boiler") else { panic!("boiler should be unknown") };
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("ashp, gshp, ventilation"));
        assert!(lookup("ventilation:height").is_err());
        let (gshp, _) = lookup("gshp").unwrap();
        assert!(gshp.measurement(&ConfigDocument::default(), "trt").is_ok());
        assert!(matches!(gshp.measurement(&ConfigDocument::default(), "sonar"), Err(e) if e.exit_code() == 2));
    }
}
