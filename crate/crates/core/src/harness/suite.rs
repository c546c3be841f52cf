use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::SuiteConfig;
use super::experiment::{Experiment, ExperimentReport};
use super::properties::{Property, PropertyResult};
use crate::bounds::{write_reports_csv, BoundReport, GapEstimate};
use crate::kernel::{CmiEstimate, Method};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNKNOWN_ID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_UNSATISFIED: i32 = 4;

/// Process exit code for a failed run: unknown ids and infeasible exact
/// requests get their own codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnknownId { .. } => EXIT_UNKNOWN_ID,
        Error::TooLargeForExact { .. } => EXIT_INFEASIBLE,
        _ => EXIT_ERROR,
    }
}

/// Everything a suite run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub toolkit_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub experiments: Vec<ExperimentReport>,
    pub properties: Vec<PropertyResult>,
    /// Seconds spent per experiment or property; JSON only.
    pub wall_times: BTreeMap<String, f64>,
}

impl SuiteReport {
    /// Bound reports in experiment order, then theorem order.
    pub fn reports(&self) -> impl Iterator<Item = &BoundReport> + '_ {
        self.experiments.iter().flat_map(|e| e.reports.iter())
    }

    pub fn all_satisfied(&self) -> bool {
        self.reports().all(|r| r.satisfied) && self.properties.iter().all(|p| p.satisfied)
    }

    /// `0` when every checked inequality holds, `4` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_satisfied() {
            EXIT_OK
        } else {
            EXIT_UNSATISFIED
        }
    }
}

/// Runs every experiment and property of a validated config. Computations
/// run on the current rayon pool; results do not depend on its size.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let mut wall_times = BTreeMap::new();
    let mut experiments = Vec::with_capacity(config.experiments.len());
    for e in &config.experiments {
        let start = Instant::now();
        experiments.push(Experiment::build(e)?.run(config.seed)?);
        wall_times.insert(e.id.clone(), start.elapsed().as_secs_f64());
    }
    let mut properties = Vec::with_capacity(config.properties.len());
    for p in &config.properties {
        let start = Instant::now();
        let property = Property::build(p)?;
        properties.push(property.run(config.seed)?);
        wall_times.insert(format!("property:{}", property.id()), start.elapsed().as_secs_f64());
    }
    Ok(SuiteReport {
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config.hash(),
        seed: config.seed,
        experiments,
        properties,
        wall_times,
    })
}

/// Loads the config at `path` and runs it.
pub fn run_suite_file(path: &Path) -> Result<SuiteReport> {
    run_suite(&SuiteConfig::load(path)?)
}

/// Output format of [`emit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// One row per (experiment, theorem) in the bound-report schema.
    Csv,
    /// The whole report.
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::UnknownId { kind: "format", id: other.into() }),
        }
    }
}

pub fn write_report<W: Write>(report: &SuiteReport, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => write_reports_csv(&report.reports().cloned().collect::<Vec<_>>(), out),
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out).map_err(|e| Error::Json(serde_json::Error::io(e)))
        }
    }
}

/// Writes the report to `path`.
pub fn emit(report: &SuiteReport, format: Format, path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    write_report(report, format, &mut bytes)?;
    std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.into(), source })
}

#[derive(Serialize)]
struct EstimateRow<'a> {
    experiment: &'a str,
    value_nats: f64,
    ci: f64,
    method: Method,
    trials: usize,
    lower_bound: bool,
}

/// Columns of [`write_estimates_csv`].
pub const ESTIMATE_COLUMNS: [&str; 6] = ["experiment", "value_nats", "ci", "method", "trials", "lower_bound"];

/// One CSV row per `(experiment id, estimate)`; header always written.
pub fn write_estimates_csv<W: Write>(rows: &[(String, CmiEstimate)], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(ESTIMATE_COLUMNS)?;
    for (id, e) in rows {
        w.serialize(EstimateRow {
            experiment: id,
            value_nats: e.value.0,
            ci: e.ci_halfwidth,
            method: e.method,
            trials: e.trials,
            lower_bound: e.lower_bound,
        })?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

#[derive(Serialize)]
struct GapRow<'a> {
    experiment: &'a str,
    empirical_mean: f64,
    population_mean: f64,
    gap: f64,
    ci_halfwidth: f64,
    gap_squared: f64,
    abs_gap: f64,
    trials: usize,
    seed: u64,
}

/// Columns of [`write_gaps_csv`].
pub const GAP_COLUMNS: [&str; 9] =
    ["experiment", "empirical_mean", "population_mean", "gap", "ci_halfwidth", "gap_squared", "abs_gap", "trials", "seed"];

/// One CSV row per `(experiment id, gap estimate)`; header always written.
pub fn write_gaps_csv<W: Write>(rows: &[(String, GapEstimate)], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(GAP_COLUMNS)?;
    for (id, g) in rows {
        w.serialize(GapRow {
            experiment: id,
            empirical_mean: g.empirical_mean,
            population_mean: g.population_mean,
            gap: g.gap,
            ci_halfwidth: g.ci_halfwidth,
            gap_squared: g.gap_squared,
            abs_gap: g.abs_gap,
            trials: g.trials,
            seed: g.seed,
        })?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

/// Parses a report written in JSON format.
pub fn read_report(path: &Path) -> Result<SuiteReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::CSV_COLUMNS;

    const SMALL: &str = r#"{
        "seed": 4,
        "experiments": [{
            "id": "grid",
            "learner": {"id": "threshold"},
            "distribution": {"id": "grid", "points": 16, "cut": 8},
            "loss": {"id": "zero-one"},
            "n": 10,
            "trials": 200,
            "cmi": {"mode": "mc", "trials": 40},
            "theorems": [{"id": "agnostic-expected"}, {"id": "markov", "epsilon": 0.2}]
        }],
        "properties": [{"id": "gaussian-kl"}]
    }"#;

    #[test]
    fn empty_suite_passes() {
        let report = run_suite(&SuiteConfig::from_json(r#"{"seed": 0}"#).unwrap()).unwrap();
        assert_eq!(report.exit_code(), EXIT_OK);
        let mut csv = Vec::new();
        write_report(&report, Format::Csv, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), CSV_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn json_round_trip_and_csv_rows() {
        let report = run_suite(&SuiteConfig::from_json(SMALL).unwrap()).unwrap();
        assert_eq!(report.exit_code(), EXIT_OK, "{report:?}");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit(&report, Format::Json, &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), report);
        let mut csv = Vec::new();
        write_report(&report, Format::Csv, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 2);
    }

    #[test]
    fn falsified_rhs_and_error_codes() {
        let mut config = SuiteConfig::from_json(SMALL).unwrap();
        config.experiments[0].theorems[0].rhs_override = Some(-1.0);
        assert_eq!(run_suite(&config).unwrap().exit_code(), EXIT_UNSATISFIED);

        let unknown = SMALL.replace(r#""id": "threshold""#, r#""id": "svm""#);
        let err = SuiteConfig::from_json(&unknown).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_UNKNOWN_ID);

        let exact = SMALL.replace(r#"{"mode": "mc", "trials": 40}"#, r#"{"mode": "exact"}"#);
        let err = run_suite(&SuiteConfig::from_json(&exact).unwrap()).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_INFEASIBLE);
    }

    #[test]
    fn estimate_and_gap_csv() {
        let mut out = Vec::new();
        write_estimates_csv(&[("a".into(), CmiEstimate::exact(0.5))], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "experiment,value_nats,ci,method,trials,lower_bound\na,0.5,0.0,exact,1,false\n");
        let mut out = Vec::new();
        write_gaps_csv(&[], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), GAP_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let report = run_suite(&SuiteConfig::from_json(r#"{"seed": 0}"#).unwrap()).unwrap();
        let err = emit(&report, Format::Csv, Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }
}
