use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use voi_core::{
    evii_with_table, evpi, outcome_distribution, sensitivity_sweep, solve_prior, DecisionProblem, Histogram,
    PriorSolution, SweepAnalysis, SweepRow, UtilityTable, VoiReport,
};

use crate::config::ConfigDocument;
use crate::error::CliError;
use crate::registry::{lookup, ProblemEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Prior,
    Evpi,
    Evii,
    OutcomeDist,
    Sweep,
}

/// Everything needed to reproduce one analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRequest {
    pub problem: String,
    pub analysis: Analysis,
    /// EVII only; all registered measurements when absent.
    pub measurement: Option<String>,
    /// Outcome distribution only: action index or label; the prior-optimal
    /// action when absent.
    pub action: Option<String>,
    pub config: ConfigDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EviiRow {
    pub measurement: String,
    pub cost: f64,
    pub report: VoiReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "analysis", rename_all = "kebab-case")]
pub enum Outcome {
    Prior {
        solution: PriorSolution,
    },
    Evpi {
        report: VoiReport,
    },
    Evii {
        reports: Vec<EviiRow>,
        /// Measurement with the largest net benefit.
        best_measurement: String,
    },
    OutcomeDist {
        histogram: Histogram,
    },
    Sweep {
        sweep: String,
        rows: Vec<SweepRow>,
    },
}

/// Contents of `report.json`. Holds no timing or worker information so
/// that it is byte-identical across re-runs of the same request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub problem: String,
    pub currency: String,
    /// Unit of every money value, e.g. `gbp_per_year`.
    pub unit: String,
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub request: AnalysisRequest,
    pub seed: u64,
    pub workers: usize,
    pub duration_seconds: f64,
    /// Prior draws redrawn at a parameter ceiling, summed over the run.
    pub redraws: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let err = |message: String| CliError::Config {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| err(e.to_string()))
    }
}

pub struct RunOutput {
    pub report: ReportDocument,
    pub manifest: RunManifest,
    pub files: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

struct Computed {
    outcome: Outcome,
    table: Option<UtilityTable>,
    redraws: u64,
}

fn resolve_action(problem: &DecisionProblem, action: &str) -> Result<usize, CliError> {
    if let Ok(i) = action.parse::<usize>() {
        if i < problem.actions.len() {
            return Ok(i);
        }
    }
    problem.actions.find(action).map(|a| a.index).ok_or_else(|| CliError::UnknownName {
        kind: "action",
        name: action.to_string(),
        available: problem.actions.iter().map(|a| a.label.clone()).collect(),
    })
}

fn compute(entry: &ProblemEntry, sweep: Option<&str>, request: &AnalysisRequest) -> Result<Computed, CliError> {
    let cfg = &request.config;
    let est = &cfg.estimator;
    if request.analysis == Analysis::Sweep {
        let name = sweep.ok_or_else(|| {
            CliError::Usage(format!(
                "sweep needs a sweep name as `--problem {0}:<sweep>`; available: {1}",
                entry.name,
                entry.sweeps.iter().map(|s| format!("{}:{}", entry.name, s.name)).collect::<Vec<_>>().join(", ")
            ))
        })?;
        let s = entry.sweep(name).expect("looked up");
        let rows = sensitivity_sweep(|v| Ok((s.family)(cfg, v)?), s.values, SweepAnalysis::Evpi, est)?;
        return Ok(Computed {
            outcome: Outcome::Sweep {
                sweep: format!("{}:{}", entry.name, s.name),
                rows,
            },
            table: None,
            redraws: 0,
        });
    }
    if sweep.is_some() {
        return Err(CliError::Usage("a `problem:sweep` name is only valid with `--analysis sweep`".into()));
    }
    let problem = (entry.build)(cfg)?;
    Ok(match request.analysis {
        Analysis::Prior => {
            let solution = solve_prior(&problem, est)?;
            Computed {
                redraws: solution.redraws,
                outcome: Outcome::Prior { solution },
                table: None,
            }
        }
        Analysis::Evpi => {
            let mut report = evpi(&problem, est)?;
            if let Some(info) = &entry.perfect_information {
                report = report.with_cost(Some(info.label), (info.cost)(cfg));
            }
            Computed {
                redraws: report.prior.redraws,
                outcome: Outcome::Evpi { report },
                table: None,
            }
        }
        Analysis::Evii => {
            let measurements = match &request.measurement {
                Some(label) => vec![entry.measurement(cfg, label)?],
                None => (entry.measurements)(cfg),
            };
            if measurements.is_empty() {
                return Err(CliError::Usage(format!(
                    "problem `{}` has no measurement models; use --analysis evpi",
                    entry.name
                )));
            }
            let mut rows = Vec::new();
            let mut table = None;
            let mut redraws = 0;
            for m in &measurements {
                let (report, t) = evii_with_table(&problem, m, est)?;
                // every measurement reuses the same prior draws
                redraws = redraws.max(report.prior.redraws);
                table = table.or(t);
                rows.push(EviiRow {
                    measurement: m.label.clone(),
                    cost: m.cost,
                    report,
                });
            }
            let best = rows
                .iter()
                .fold(None::<&EviiRow>, |best, r| match best {
                    Some(b) if b.report.net_benefit >= r.report.net_benefit => Some(b),
                    _ => Some(r),
                })
                .map(|r| r.measurement.clone())
                .unwrap_or_default();
            Computed {
                outcome: Outcome::Evii {
                    reports: rows,
                    best_measurement: best,
                },
                table,
                redraws,
            }
        }
        Analysis::OutcomeDist => {
            let action = match &request.action {
                Some(a) => resolve_action(&problem, a)?,
                None => solve_prior(&problem, est)?.best_action,
            };
            Computed {
                outcome: Outcome::OutcomeDist {
                    histogram: outcome_distribution(&problem, action, est)?,
                },
                table: None,
                redraws: 0,
            }
        }
        Analysis::Sweep => unreachable!("handled above"),
    })
}

fn summarize(report: &ReportDocument) -> String {
    let u = &report.unit;
    match &report.outcome {
        Outcome::Prior { solution } => format!(
            "{}: best action {} with expected utility {:.2} ± {:.2} {u} ({:?}, {} samples)",
            report.problem,
            solution.best_label,
            solution.expected_utility,
            solution.standard_error,
            solution.backend,
            solution.n_samples
        ),
        Outcome::Evpi { report: r } => {
            let mut s = format!(
                "{}: EVPI {:.2} ± {:.2} {u}; prior action {}",
                report.problem, r.value, r.standard_error, r.prior.best_label
            );
            if let (Some(l), Some(nb)) = (&r.measurement_label, r.net_benefit) {
                s += &format!("; net benefit of {l} {nb:.2}");
            }
            s
        }
        Outcome::Evii {
            reports,
            best_measurement,
        } => {
            let parts: Vec<String> = reports
                .iter()
                .map(|r| {
                    format!(
                        "{} EVII {:.2} ± {:.2}, net {:.2}",
                        r.measurement,
                        r.report.value,
                        r.report.standard_error,
                        r.report.net_benefit.unwrap_or(f64::NAN)
                    )
                })
                .collect();
            format!("{} ({u}): {}; best: {best_measurement}", report.problem, parts.join("; "))
        }
        Outcome::OutcomeDist { histogram: h } => format!(
            "{}: utility of {} has mean {:.2} ± {:.2} {u} over [{:.2}, {:.2}]",
            report.problem,
            h.label,
            h.mean,
            h.standard_error,
            h.edges[0],
            h.edges[h.edges.len() - 1]
        ),
        Outcome::Sweep { sweep, rows } => {
            let parts: Vec<String> = rows
                .iter()
                .map(|r| match (&r.best_label, r.evpi) {
                    (Some(l), Some(e)) => format!("{}: {l}, EVPI {e:.2}", r.value),
                    _ => format!("{}: {}", r.value, r.status),
                })
                .collect();
            format!("{sweep} ({u}): {}", parts.join("; "))
        }
    }
}

/// Runs the request and returns the report without writing anything.
pub fn execute(request: &AnalysisRequest) -> Result<(ReportDocument, Option<UtilityTable>, u64), CliError> {
    request.config.estimator.validate()?;
    let (entry, sweep) = lookup(&request.problem)?;
    let computed = compute(&entry, sweep, request)?;
    let meta = (entry.build)(&request.config)?.metadata;
    let report = ReportDocument {
        problem: request.problem.clone(),
        unit: meta.time_basis.unit_suffix(&meta.currency),
        currency: meta.currency,
        seed: request.config.estimator.seed,
        outcome: computed.outcome,
    };
    Ok((report, computed.table, computed.redraws))
}

/// Runs the request and writes `report.json`, CSV sidecars and
/// `manifest.json` into `out`.
pub fn run(request: &AnalysisRequest, out: &Path) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let (report, table, redraws) = execute(request)?;
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.display().to_string(),
        source,
    })?;
    let mut files = vec![write_json(out, "report.json", &report)?];
    files.extend(crate::output::write_tables(out, &report, table.as_ref(), &request.config)?);
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        request: request.clone(),
        seed: request.config.estimator.seed,
        workers: request.config.estimator.workers,
        duration_seconds: 0.0,
        redraws,
        outputs: Vec::new(),
    };
    files.push(out.join("manifest.json"));
    manifest.outputs = files
        .iter()
        .map(|f| f.file_name().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    write_json(out, "manifest.json", &manifest)?;
    Ok(RunOutput {
        summary: summarize(&report),
        report,
        manifest,
        files,
    })
}

pub(crate) fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}
