//! Plot-ready CSV sidecars. Every header names its unit.

use std::path::{Path, PathBuf};

use voi_core::{ActionStat, PriorSolution, UtilityTable, VoiReport};

use crate::config::ConfigDocument;
use crate::error::CliError;
use crate::registry::lookup;
use crate::run::{Outcome, ReportDocument};

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: impl IntoIterator<Item = String>) -> Self {
        Self {
            header: header.into_iter().collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
        let path = dir.join(name);
        let err = |e: csv::Error| CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn action_unit(report: &ReportDocument, config: &ConfigDocument) -> Result<String, CliError> {
    let (entry, _) = lookup(&report.problem)?;
    let problem = (entry.build)(config)?;
    Ok(problem.actions.get(0).map(|a| a.unit.clone()).unwrap_or_default())
}

fn per_action(solution: &PriorSolution, unit: &str, action_unit: &str) -> Table {
    let mut t = Table::new([
        "action".into(),
        "label".into(),
        format!("setting_{action_unit}"),
        format!("expected_utility_{unit}"),
        format!("standard_error_{unit}"),
    ]);
    for ActionStat {
        action,
        label,
        payload,
        mean,
        standard_error,
    } in &solution.per_action
    {
        t.push(vec![action.to_string(), label.clone(), num(*payload), num(*mean), num(*standard_error)]);
    }
    t
}

fn posterior_actions(reports: &[(&str, &VoiReport)]) -> Table {
    let mut t = Table::new(["information".into(), "action".into(), "label".into(), "fraction_of_samples".into()]);
    for (name, r) in reports {
        for f in &r.posterior_action_frequency {
            t.push(vec![name.to_string(), f.action.to_string(), f.label.clone(), num(f.fraction)]);
        }
    }
    t
}

/// Writes the CSV files that belong to the report's analysis.
pub fn write_tables(
    dir: &Path,
    report: &ReportDocument,
    table: Option<&UtilityTable>,
    config: &ConfigDocument,
) -> Result<Vec<PathBuf>, CliError> {
    let u = report.unit.as_str();
    let mut files = Vec::new();
    match &report.outcome {
        Outcome::Prior { solution } => {
            files.push(per_action(solution, u, &action_unit(report, config)?).write(dir, "per_action.csv")?);
        }
        Outcome::Evpi { report: r } => {
            files.push(per_action(&r.prior, u, &action_unit(report, config)?).write(dir, "per_action.csv")?);
            let label = r.measurement_label.as_deref().unwrap_or("perfect");
            files.push(posterior_actions(&[(label, r)]).write(dir, "posterior_actions.csv")?);
        }
        Outcome::Evii { reports, .. } => {
            let first = &reports[0].report;
            files.push(per_action(&first.prior, u, &action_unit(report, config)?).write(dir, "per_action.csv")?);
            let pairs: Vec<(&str, &VoiReport)> =
                reports.iter().map(|r| (r.measurement.as_str(), &r.report)).collect();
            files.push(posterior_actions(&pairs).write(dir, "posterior_actions.csv")?);
            let cur = report.currency.to_lowercase();
            let mut t = Table::new([
                "measurement".into(),
                format!("cost_{cur}"),
                format!("evii_{u}"),
                format!("evii_standard_error_{u}"),
                format!("net_benefit_{u}"),
            ]);
            for r in reports {
                t.push(vec![
                    r.measurement.clone(),
                    num(r.cost),
                    num(r.report.value),
                    num(r.report.standard_error),
                    opt(&r.report.net_benefit),
                ]);
            }
            files.push(t.write(dir, "net_benefit.csv")?);
            if let Some(tab) = table {
                files.push(utility_table(report, tab, config)?.write(dir, "utility_table.csv")?);
            }
        }
        Outcome::OutcomeDist { histogram: h } => {
            let mut t = Table::new([
                format!("bin_lower_{u}"),
                format!("bin_upper_{u}"),
                "count".into(),
                "probability".into(),
            ]);
            for (k, (c, m)) in h.counts.iter().zip(&h.mass).enumerate() {
                t.push(vec![num(h.edges[k]), num(h.edges[k + 1]), c.to_string(), num(*m)]);
            }
            files.push(t.write(dir, "histogram.csv")?);
        }
        Outcome::Sweep { sweep, rows } => {
            let (entry, name) = lookup(sweep)?;
            let unit = entry.sweep(name.unwrap_or_default()).map_or("value", |s| s.unit);
            let action_unit = (entry.build)(config)?.actions.get(0).map(|a| a.unit.clone()).unwrap_or_default();
            let mut t = Table::new([
                format!("value_{unit}"),
                "seed".into(),
                "status".into(),
                "best_action".into(),
                "best_label".into(),
                format!("best_setting_{action_unit}"),
                format!("expected_utility_{u}"),
                format!("standard_error_{u}"),
                format!("evpi_{u}"),
                format!("evpi_standard_error_{u}"),
            ]);
            for r in rows {
                t.push(vec![
                    num(r.value),
                    r.seed.to_string(),
                    r.status.clone(),
                    opt(&r.best_action),
                    opt(&r.best_label),
                    opt(&r.best_payload),
                    opt(&r.expected_utility),
                    opt(&r.standard_error),
                    opt(&r.evpi),
                    opt(&r.evpi_standard_error),
                ]);
            }
            files.push(t.write(dir, "sweep.csv")?);
        }
    }
    Ok(files)
}


fn utility_table(report: &ReportDocument, tab: &UtilityTable, config: &ConfigDocument) -> Result<Table, CliError> {
    let (entry, _) = lookup(&report.problem)?;
    let problem = (entry.build)(config)?;
    let unit = problem
        .schema
        .iter()
        .find(|p| p.name == tab.parameter)
        .map(|p| p.unit.replace('/', "_per_"))
        .unwrap_or_default();
    let u = &report.unit;
    let mut t = Table::new([
        format!("{}_{unit}", tab.parameter),
        "action".into(),
        "label".into(),
        format!("expected_utility_{u}"),
    ]);
    for (k, x) in tab.points.iter().enumerate() {
        for (a, values) in tab.values.iter().enumerate() {
            let label = problem.actions.get(a).map(|x| x.label.clone()).unwrap_or_default();
            t.push(vec![num(*x), a.to_string(), label, num(values[k])]);
        }
    }
    Ok(t)
}
