//! Persisted calibration constants.
//!
//! The underlying estimates carry non-constructive absolute constants; the
//! artifact materializes each one as an empirically calibrated value with
//! provenance, and verification reruns compare against the recorded value
//! with 5% slack. Format: versioned flat `key = value` text, values printed
//! in shortest round-trip form so the table survives save/load bitwise.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Multiplier applied to recorded constants when regression-checking.
pub const REGRESSION_SLACK: f64 = 1.05;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ConstEntry {
    pub value: f64,
    pub provenance: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstantsTable {
    entries: BTreeMap<String, ConstEntry>,
}

impl ConstantsTable {
    pub fn new() -> ConstantsTable {
        ConstantsTable::default()
    }

    /// The table shipped with the crate (calibrated once, regression-tested).
    pub fn builtin() -> ConstantsTable {
        ConstantsTable::parse(include_str!("../../data/constants.txt"))
            .expect("embedded constants table parses")
    }

    pub fn set(&mut self, key: &str, value: f64, provenance: &str) {
        self.entries.insert(
            key.to_string(),
            ConstEntry {
                value,
                provenance: provenance.to_string(),
            },
        );
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).map(|e| e.value)
    }

    /// Recorded value times the regression slack, or an error naming the
    /// missing key (run `calibrate` first).
    pub fn bound(&self, key: &str) -> Result<f64> {
        self.get(key)
            .map(|v| v * REGRESSION_SLACK)
            .ok_or_else(|| Error::Config(format!("constant \"{key}\" not calibrated yet")))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &ConstEntry)> {
        self.entries.iter()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# calibrated constants; regenerate with `ergolab calibrate all`");
        let _ = writeln!(s, "version = {SCHEMA_VERSION}");
        for (k, e) in &self.entries {
            let _ = writeln!(s, "{k}.value = {}", e.value);
            let _ = writeln!(s, "{k}.provenance = {}", e.provenance);
        }
        s
    }

    pub fn parse(text: &str) -> Result<ConstantsTable> {
        let mut entries: BTreeMap<String, ConstEntry> = BTreeMap::new();
        let mut version = None;
        let mut pending: BTreeMap<String, (Option<f64>, Option<String>)> = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("constants line {} has no '='", ln + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if key == "version" {
                version = Some(value.parse::<u32>().map_err(|_| {
                    Error::Config(format!("bad version \"{value}\" in constants table"))
                })?);
                continue;
            }
            if let Some(base) = key.strip_suffix(".value") {
                let v: f64 = value
                    .parse()
                    .map_err(|_| Error::Config(format!("bad value for {base}: \"{value}\"")))?;
                pending.entry(base.to_string()).or_default().0 = Some(v);
            } else if let Some(base) = key.strip_suffix(".provenance") {
                pending.entry(base.to_string()).or_default().1 = Some(value.to_string());
            } else {
                return Err(Error::Config(format!("unrecognized constants key \"{key}\"")));
            }
        }
        match version {
            Some(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::Config(format!(
                    "constants table version {v}, expected {SCHEMA_VERSION}"
                )))
            }
            None => return Err(Error::Config("constants table missing version".into())),
        }
        for (k, (v, p)) in pending {
            let value =
                v.ok_or_else(|| Error::Config(format!("constant {k} has no value line")))?;
            entries.insert(
                k,
                ConstEntry {
                    value,
                    provenance: p.unwrap_or_default(),
                },
            );
        }
        Ok(ConstantsTable { entries })
    }

    pub fn load(path: &Path) -> Result<ConstantsTable> {
        ConstantsTable::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let mut t = ConstantsTable::new();
        t.set("K_cal", 0.1 + 0.2, "grid=tiny seed=1");
        t.set("c_threshold.power:1.5", 1.0, "scan=[1,1e4]");
        t.set("weird", f64::MIN_POSITIVE, "denormal-adjacent");
        let text = t.to_text();
        let back = ConstantsTable::parse(&text).unwrap();
        assert_eq!(t, back);
        // shortest repr round-trips bitwise
        assert_eq!(back.get("K_cal").unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn bound_applies_slack() {
        let mut t = ConstantsTable::new();
        t.set("x", 2.0, "");
        assert!((t.bound("x").unwrap() - 2.1).abs() < 1e-15);
        assert!(t.bound("missing").is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConstantsTable::parse("nonsense").is_err());
        assert!(ConstantsTable::parse("version = 99\n").is_err());
        assert!(ConstantsTable::parse("version = 1\nfoo.value = bar\n").is_err());
        assert!(ConstantsTable::parse("version = 1\nfoo = 1\n").is_err());
    }
}
