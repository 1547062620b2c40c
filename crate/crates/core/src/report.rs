//! Machine-readable experiment reports: `report.json` plus an optional
//! `series.csv` sidecar.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::bounds::BoundsContext;
use crate::error::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const SERIES_FILE: &str = "series.csv";

/// Key holding the only run-dependent value of a report.
pub const WALL_CLOCK_KEY: &str = "wall_clock_seconds";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "==")]
    ApproxEq,
}

/// A checked inequality with both sides recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    /// Relative tolerance for [`Relation::ApproxEq`]; zero otherwise.
    pub tolerance: f64,
    pub passed: bool,
}

impl Assertion {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::build(name, lhs, Relation::Le, rhs, 0.0, lhs <= rhs)
    }

    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::build(name, lhs, Relation::Lt, rhs, 0.0, lhs < rhs)
    }

    /// `|lhs - rhs| <= tolerance * max(|lhs|, |rhs|)`.
    pub fn approx(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let passed = (lhs - rhs).abs() <= tolerance * scale;
        Self::build(name, lhs, Relation::ApproxEq, rhs, tolerance, passed)
    }

    /// A boolean condition encoded as `0 <= 0` or `1 <= 0`.
    pub fn holds(name: impl Into<String>, condition: bool) -> Self {
        Self::le(name, if condition { 0.0 } else { 1.0 }, 0.0)
    }

    fn build(name: impl Into<String>, lhs: f64, relation: Relation, rhs: f64, tolerance: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            lhs,
            relation,
            rhs,
            tolerance,
            passed,
        }
    }

    pub fn describe(&self) -> String {
        let rel = match self.relation {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::ApproxEq => "~=",
        };
        let tol = if self.relation == Relation::ApproxEq {
            format!(" (rel tol {:e})", self.tolerance)
        } else {
            String::new()
        };
        format!("{}: {:.17e} {rel} {:.17e}{tol}", self.name, self.lhs, self.rhs)
    }
}

/// Tabular sidecar; every row has `headers.len()` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub problem_digest: String,
    pub bounds: Option<BoundsContext>,
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub all_passed: bool,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn new(command: &str, config_text: &str) -> Self {
        Self {
            command: command.to_string(),
            problem_digest: digest(config_text),
            bounds: None,
            results: Value::Object(Default::default()),
            assertions: Vec::new(),
            all_passed: true,
            wall_clock_seconds: 0.0,
        }
    }

    pub fn assert(&mut self, a: Assertion) {
        self.all_passed &= a.passed;
        self.assertions.push(a);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

/// Hex SHA-256 of the text.
pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Writes finite floats in scientific notation with 17 significant digits.
struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes `report.json` and, when given, `series.csv` into `out_dir`
/// (created if missing). Returns the written paths.
pub fn write_report(report: &ExperimentReport, series: Option<&Series>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    let json_path = out_dir.join(REPORT_FILE);
    fs::write(&json_path, to_json_string(report)?)?;
    paths.push(json_path);
    if let Some(series) = series {
        let csv_path = out_dir.join(SERIES_FILE);
        let mut w = csv::Writer::from_path(&csv_path)?;
        w.write_record(&series.headers)?;
        for row in &series.rows {
            if row.len() != series.headers.len() {
                return Err(Error::InvalidParameter(format!(
                    "series row has {} entries, header has {}",
                    row.len(),
                    series.headers.len()
                )));
            }
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        paths.push(csv_path);
    }
    Ok(paths)
}

/// Drops the wall-clock field so two reports can be compared byte for byte.
pub fn strip_wall_clock(json: &str) -> Result<String> {
    let mut value: Value = serde_json::from_str(json)?;
    if let Value::Object(map) = &mut value {
        map.remove(WALL_CLOCK_KEY);
    }
    to_json_string(&value)
}
