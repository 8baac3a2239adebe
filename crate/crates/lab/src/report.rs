//! CSV tables, pass/fail checks and the run manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Note placed at the top of every CSV.
pub const PRECISION_NOTE: &str =
    "boundary orbits are iterated in double precision; individual orbits are not shadowed, only statistics are meaningful";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// One CSV file: commented header, column row, data rows.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub title: String,
    columns: Vec<(&'static str, &'static str)>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, title: &str, columns: &[(&'static str, &'static str)]) -> Self {
        Table {
            name: name.to_owned(),
            title: title.to_owned(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// The file body: comments, header and rows, LF-terminated.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut comments = format!("# {}\n# {PRECISION_NOTE}\n", self.title);
        for (name, help) in &self.columns {
            comments.push_str(&format!("# {name}: {help}\n"));
        }
        out.extend_from_slice(comments.as_bytes());
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.columns.iter().map(|(n, _)| *n))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// A configured assertion and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub requirement: String,
    pub passed: bool,
}

impl Check {
    pub fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Check {
            name: name.to_owned(),
            measured,
            requirement: format!(">= {bound}"),
            passed: measured >= bound,
        }
    }

    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Check {
            name: name.to_owned(),
            measured,
            requirement: format!("<= {bound}"),
            passed: measured <= bound,
        }
    }

    pub fn within(name: &str, measured: f64, low: f64, high: f64) -> Self {
        Check {
            name: name.to_owned(),
            measured,
            requirement: format!("in [{low}, {high}]"),
            passed: (low..=high).contains(&measured),
        }
    }
}

/// Everything a preset produced.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub measurements: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn measure(&mut self, name: &str, value: f64) {
        self.measurements.push((name.to_owned(), value));
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn measurement(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Run details recorded beside the results.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub preset: String,
    pub claim: String,
    pub config: Vec<(String, String)>,
    pub threads: usize,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes every table plus `manifest.json` into `dir`; returns the manifest path.
pub fn write_report(report: &Report, info: &RunInfo, dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for table in &report.tables {
        let body = table.to_csv();
        let file = format!("{}.csv", table.name);
        fs::write(dir.join(&file), &body)?;
        files.push(json!({
            "file": file,
            "rows": table.rows(),
            "sha256": sha256_hex(&body),
        }));
    }
    let measurements: serde_json::Map<String, Value> = report
        .measurements
        .iter()
        .map(|(k, v)| (k.clone(), json_number(*v)))
        .collect();
    let config: serde_json::Map<String, Value> = info
        .config
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "measured": json_number(c.measured),
                "requirement": c.requirement,
                "passed": c.passed,
            })
        })
        .collect();
    let manifest = json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "preset": info.preset,
        "claim": info.claim,
        "config": config,
        "threads": info.threads,
        "started_unix": info.started_unix,
        "elapsed_seconds": info.elapsed_seconds,
        "measurements": measurements,
        "notes": report.notes,
        "checks": checks,
        "passed": report.passed(),
        "files": files,
    });
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}
