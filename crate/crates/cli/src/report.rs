//! Experiment reports: assertion outcomes, metrics, tables and plot series.

use std::path::{Path, PathBuf};

use carlemanlab_core::field::io::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::baseline::Check;
use crate::error::{CliError, Result};

/// One pass/fail outcome, tied to the module invariant it checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    /// `<module>: <invariant>`.
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    /// How the value is compared against a frozen baseline; `None` is never frozen.
    pub frozen: Option<Check>,
}

/// Rows with string cells, written verbatim as CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// Shortest round-trip scientific notation; the only float format in CSV output.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// One plot: several labeled lines sharing axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// File stem of the SVG.
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub lines: Vec<Line>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
}

/// Everything an experiment produces before anything is written to disk.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub rows: Table,
    /// Additional CSV files, by file name.
    pub tables: Vec<(String, Table)>,
    pub assertions: Vec<Assertion>,
    pub metrics: Vec<Metric>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
    /// Binary or JSON files produced by the owning module, by file name.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn assert(&mut self, name: &str, invariant: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { name: name.into(), invariant: invariant.into(), passed, detail: detail.into() });
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64, frozen: Option<Check>) {
        self.metrics.push(Metric { name: name.into(), value, frozen });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: Option<u64>,
    pub fingerprint: String,
    pub config: serde_json::Value,
    pub rows: Table,
    pub assertions: Vec<Assertion>,
    pub metrics: Vec<Metric>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
    pub wall_clock_seconds: f64,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn failed_assertions(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Report { path: PathBuf::from(path), message: e.to_string() })
    }
}

/// Writes `bytes` to `dir/name` and returns its hash record.
pub fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<Artifact> {
    std::fs::write(dir.join(name), bytes)?;
    Ok(Artifact { file: name.to_string(), sha256: sha256_hex(bytes) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_plain_and_quoted_only_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), num(0.25)]);
        t.push(vec!["x,y".into(), num(f64::INFINITY)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "a,b\n1,2.5e-1\n\"x,y\",inf\n");
    }

    #[test]
    fn num_roundtrips() {
        for x in [0.1, 1e-300, 123456.789, -2.5, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
