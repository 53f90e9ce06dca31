//! Experiment orchestration: configuration, lemma verification with
//! machine-readable reports, decay-slope fits, and calibration-constant
//! persistence.

mod calibrate;
mod config;
mod constants;
mod decay;
mod report;
pub(crate) mod sweeps;
mod verify;

pub use calibrate::{calibrate, calibrate_all, ConstantId, THRESHOLD_FAMILIES};
pub use config::{ExperimentConfig, OutputFormat};
pub use constants::{ConstantsTable, REGRESSION_SLACK};
pub use decay::{fit_log_slope, run_decay, DecayFit, DecayTarget};
pub use report::{AssertionRecord, LemmaReport, Table};
pub use sweeps::{battery_starts, observable_battery};
pub use verify::{run_verify, LemmaId, ALL_LEMMAS};

use std::path::Path;

use crate::error::Result;

/// Run every lemma verification plus the lacunary decay target, writing
/// one JSON + CSV report pair per check. Returns (name, passed) in run
/// order. With a fixed seed, the written bytes are identical across runs.
pub fn run_battery(
    cfg: &ExperimentConfig,
    constants: &ConstantsTable,
    out_dir: &Path,
) -> Result<Vec<(String, bool)>> {
    let mut results = Vec::new();
    for lemma in ALL_LEMMAS {
        let report = run_verify(lemma, cfg, constants)?;
        report.write(out_dir)?;
        results.push((report.lemma.clone(), report.passed()));
    }
    let lac = run_decay(DecayTarget::E1Lacunary, cfg.seed)?;
    lac.write(out_dir)?;
    results.push((lac.lemma.clone(), lac.passed()));
    Ok(results)
}
