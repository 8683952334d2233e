//! JSON run reports.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// One asserted quantity: `value <= bound` or `value >= bound`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "<=",
            bound,
            pass: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: ">=",
            bound,
            pass: value >= bound,
        }
    }

    /// Pass/fail flag recorded as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: impl Into<String>, pass: bool) -> Self {
        Check::at_least(name, if pass { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub threads: usize,
    pub timestamp: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Map<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub details: Value,
    pub provenance: Provenance,
}

/// Report under construction inside a subcommand.
#[derive(Debug, Default)]
pub struct Builder {
    pub config: Map<String, Value>,
    pub checks: Vec<Check>,
    pub details: Map<String, Value>,
    pub seed: Option<u64>,
    pub series: Option<Series>,
}

/// Plot data written to `--csv`.
#[derive(Debug)]
pub struct Series {
    pub header: (String, String),
    pub rows: Vec<(f64, f64)>,
}

impl Builder {
    pub fn echo(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(key.to_string(), to_value(value));
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.to_string(), to_value(value));
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn series(&mut self, x: &str, y: &str, rows: Vec<(f64, f64)>) {
        self.series = Some(Series {
            header: (x.to_string(), y.to_string()),
            rows,
        });
    }

    pub fn finish(self, command: &str, threads: usize) -> (Report, Option<Series>) {
        let passed = self.checks.iter().all(|c| c.pass);
        let report = Report {
            tool: "lpcalc",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: self.config,
            checks: self.checks,
            passed,
            details: Value::Object(self.details),
            provenance: Provenance {
                seed: self.seed,
                threads,
                timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            },
        };
        (report, self.series)
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("report values serialize")
}

pub fn write_report(report: &Report, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write report {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_series(series: &Series, path: &Path) -> Result<(), CliError> {
    let file =
        std::fs::File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let header = (series.header.0.as_str(), series.header.1.as_str());
    lpcalc::io::write_series_csv(header, &series.rows, std::io::BufWriter::new(file))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
