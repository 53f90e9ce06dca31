//! Machine-readable reports: a JSON summary per lemma (stable schema) and a
//! CSV per-point table alongside. Contents are pure functions of config and
//! seed, so byte-identical runs reproduce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct AssertionRecord {
    pub name: String,
    pub passed: bool,
    /// measured quantity
    pub value: f64,
    /// bound it was compared against (NaN-free; equality asserts use 0)
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub schema_version: u32,
    pub lemma: String,
    pub status: String,
    pub seed: u64,
    pub measured: BTreeMap<String, f64>,
    pub assertions: Vec<AssertionRecord>,
    #[serde(skip)]
    pub table: Table,
}

impl LemmaReport {
    pub fn new(lemma: &str, seed: u64) -> LemmaReport {
        LemmaReport {
            schema_version: REPORT_SCHEMA_VERSION,
            lemma: lemma.to_string(),
            status: "pass".to_string(),
            seed,
            measured: BTreeMap::new(),
            assertions: Vec::new(),
            table: Table::default(),
        }
    }

    pub fn record(&mut self, name: &str, value: f64) {
        self.measured.insert(name.to_string(), value);
    }

    /// Assert value <= bound (records and updates status).
    pub fn check_le(&mut self, name: &str, value: f64, bound: f64) -> bool {
        let passed = value <= bound;
        if !passed {
            self.status = "fail".to_string();
        }
        self.assertions.push(AssertionRecord {
            name: name.to_string(),
            passed,
            value,
            bound,
        });
        passed
    }

    pub fn check(&mut self, name: &str, passed: bool, value: f64, bound: f64) -> bool {
        if !passed {
            self.status = "fail".to_string();
        }
        self.assertions.push(AssertionRecord {
            name: name.to_string(),
            passed,
            value,
            bound,
        });
        passed
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    /// Write `<lemma>.json` and, when the table is nonempty, `<lemma>.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(format!("{}.json", self.lemma)), json + "\n")?;
        if !self.table.columns.is_empty() {
            std::fs::write(dir.join(format!("{}.csv", self.lemma)), self.table.to_csv())?;
        }
        Ok(())
    }
}

/// A rectangular per-point table for the CSV side of a report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(',');
                }
                let _ = write!(s, "{v}");
                first = false;
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_roundtrip_and_status() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = LemmaReport::new("toeplitz", 7);
        r.record("final_gap", 0.003);
        assert!(r.check_le("gap_small", 0.003, 0.01));
        r.table = Table::new(&["n", "gap"]);
        r.table.push(vec![1024.0, 0.01]);
        r.table.push(vec![2048.0, 0.005]);
        r.write(dir.path()).unwrap();
        let json = std::fs::read_to_string(dir.path().join("toeplitz.json")).unwrap();
        assert!(json.contains("\"schema_version\": 1"));
        assert!(json.contains("\"status\": \"pass\""));
        let csv = std::fs::read_to_string(dir.path().join("toeplitz.csv")).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "n,gap");

        assert!(!r.check_le("too_big", 1.0, 0.5));
        assert!(!r.passed());
    }
}
