//! Reports and CSV files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rfde_core::suites::SuiteResult;
use rfde_core::{RegularityReport, Trajectory};
use serde::Serialize;

use crate::CliError;

/// One certified relation `lhs ≤ rhs + tol` (or `|lhs - rhs| ≤ tol`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportLine {
    pub check: String,
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ReportLine {
    pub fn leq(check: &str, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            check: check.into(),
            anchor: anchor.into(),
            lhs,
            rhs,
            tol,
            pass: lhs <= rhs + tol,
        }
    }

    pub fn eq(check: &str, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            check: check.into(),
            anchor: anchor.into(),
            lhs,
            rhs,
            tol,
            pass: (lhs - rhs).abs() <= tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    pub tol_scale: f64,
    pub all_pass: bool,
    pub checks: Vec<ReportLine>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularityReport<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<SuiteResult>>,
}

impl Report {
    pub fn new(command: &str, tol_scale: f64) -> Self {
        Self {
            command: command.into(),
            seed: None,
            trials: None,
            tol_scale,
            all_pass: true,
            checks: Vec::new(),
            skipped: Vec::new(),
            regularity: None,
            suites: None,
        }
    }

    pub fn push(&mut self, line: ReportLine) {
        self.all_pass &= line.pass;
        self.checks.push(line);
    }
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_report(dir: &Path, report: &Report) -> Result<PathBuf, CliError> {
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    let mut f = create(&path)?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// CSV with header `t,<prefix>_1,...`; one row per time, 17 significant digits.
pub fn write_csv(path: &Path, columns: &[(&str, usize)], rows: impl Iterator<Item = (f64, Vec<f64>)>) -> Result<(), CliError> {
    let mut out = String::from("t");
    for (prefix, n) in columns {
        for i in 1..=*n {
            out.push_str(&format!(",{prefix}_{i}"));
        }
    }
    out.push('\n');
    for (t, vals) in rows {
        out.push_str(&format!("{t:.16e}"));
        for v in vals {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    let mut f = create(path)?;
    f.write_all(out.as_bytes()).map_err(|e| CliError::io(path, e))
}

pub fn write_trajectory(path: &Path, x: &Trajectory<f64>) -> Result<(), CliError> {
    let (rows, cols) = x.shape();
    let n = rows * cols;
    write_csv(
        path,
        &[("x", n)],
        x.grid().iter().enumerate().map(|(k, &t)| (t, x.value(k).to_vec())),
    )
}
