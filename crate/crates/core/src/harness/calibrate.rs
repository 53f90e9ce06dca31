//! Calibration: run the defining sweep for a constant and persist the
//! value with provenance. Verification compares later runs against these
//! records (times the 5% slack).

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::constants::ConstantsTable;
use crate::harness::sweeps;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstantId {
    KCal,
    RCal,
    VCal,
    BL,
    CCal,
    GCal,
    WCal,
    E2Cal,
    MksCal,
    BaCal,
    B1mCal,
    LimCal,
    Phi2Cal,
    CThreshold(String),
}

pub const SIMPLE_IDS: [&str; 13] = [
    "K_cal", "R_cal", "V_cal", "B_L", "C_cal", "G_cal", "W_cal", "E2_cal", "MKS_cal", "BA_cal",
    "B1M_cal", "LIM_cal", "PHI2_cal",
];

/// Families whose membership thresholds ship in the builtin table.
pub const THRESHOLD_FAMILIES: [&str; 4] =
    ["power:1.02", "power:1.04", "power:1.5", "powerlog:1.02:1"];

impl ConstantId {
    pub fn key(&self) -> String {
        match self {
            ConstantId::KCal => "K_cal".into(),
            ConstantId::RCal => "R_cal".into(),
            ConstantId::VCal => "V_cal".into(),
            ConstantId::BL => "B_L".into(),
            ConstantId::CCal => "C_cal".into(),
            ConstantId::GCal => "G_cal".into(),
            ConstantId::WCal => "W_cal".into(),
            ConstantId::E2Cal => "E2_cal".into(),
            ConstantId::MksCal => "MKS_cal".into(),
            ConstantId::BaCal => "BA_cal".into(),
            ConstantId::B1mCal => "B1M_cal".into(),
            ConstantId::LimCal => "LIM_cal".into(),
            ConstantId::Phi2Cal => "PHI2_cal".into(),
            ConstantId::CThreshold(f) => format!("c_threshold.{f}"),
        }
    }

    pub fn all() -> Vec<ConstantId> {
        let mut v: Vec<ConstantId> = SIMPLE_IDS
            .iter()
            .map(|s| s.parse().expect("simple ids parse"))
            .collect();
        for f in THRESHOLD_FAMILIES {
            v.push(ConstantId::CThreshold(f.to_string()));
        }
        v
    }
}

impl FromStr for ConstantId {
    type Err = Error;
    fn from_str(s: &str) -> Result<ConstantId> {
        match s {
            "K_cal" => Ok(ConstantId::KCal),
            "R_cal" => Ok(ConstantId::RCal),
            "V_cal" => Ok(ConstantId::VCal),
            "B_L" => Ok(ConstantId::BL),
            "C_cal" => Ok(ConstantId::CCal),
            "G_cal" => Ok(ConstantId::GCal),
            "W_cal" => Ok(ConstantId::WCal),
            "E2_cal" => Ok(ConstantId::E2Cal),
            "MKS_cal" => Ok(ConstantId::MksCal),
            "BA_cal" => Ok(ConstantId::BaCal),
            "B1M_cal" => Ok(ConstantId::B1mCal),
            "LIM_cal" => Ok(ConstantId::LimCal),
            "PHI2_cal" => Ok(ConstantId::Phi2Cal),
            other => match other.strip_prefix("c_threshold.") {
                Some(f) if !f.is_empty() => Ok(ConstantId::CThreshold(f.to_string())),
                _ => Err(Error::Config(format!("unknown constant id \"{other}\""))),
            },
        }
    }
}

/// Run the defining sweep and record the value. Returns the fresh value.
pub fn calibrate(id: &ConstantId, seed: u64, table: &mut ConstantsTable) -> Result<f64> {
    let (value, grid): (f64, &str) = match id {
        ConstantId::KCal => (
            sweeps::measure_k_cal(),
            "sup |g_M|·max(1,M‖x‖); 1e5 uniform + 1e3 clustered; M={2,8,64,512}",
        ),
        ConstantId::RCal => (
            sweeps::measure_r_cal()?,
            "coeff ratio; m<=512 dense then log to 1e4; M={8,64,512}",
        ),
        ConstantId::VCal => (
            sweeps::measure_v_cal()?,
            "vdc ratio; power:1.5; m={1,2,4,8}; N=2^10..2^20",
        ),
        ConstantId::BL => (
            sweeps::measure_b_l()?,
            "max|L_N|; power:1.02 paper-exact; N=2^10..2^14",
        ),
        ConstantId::CCal => (
            sweeps::measure_c_cal()?,
            "u3control ratio; pm1+modulated battery; N={32,64,128,256}",
        ),
        ConstantId::GCal => (
            sweeps::measure_g_cal()?,
            "smallgain ratio; power:1.02 sigma0=0.2; N=2^12; all l",
        ),
        ConstantId::WCal => (
            sweeps::measure_w_cal()?,
            "modulation-search ratio; power:1.02 sigma0=0.2; N=2^12; l>=4",
        ),
        ConstantId::E2Cal => (
            sweeps::measure_e2_cal()?,
            "|E2|/bound; golden battery x {0,golden,0.3}; N=2^10..2^20",
        ),
        ConstantId::MksCal => (
            sweeps::measure_mks_cal()?,
            "min-kernel ratio; power:1.02; q={0,1}; N=2^10..2^20",
        ),
        ConstantId::BaCal => (
            sweeps::measure_ba_cal()?,
            "|B−A| decaying pair; golden rotation; N=1e6",
        ),
        ConstantId::B1mCal => (
            sweeps::measure_b1m_cal()?,
            "|B| decaying pair; golden rotation; N=1e6",
        ),
        ConstantId::LimCal => (
            sweeps::measure_lim_cal()?,
            "battery max |B−A|; golden rotation; N=1e5",
        ),
        ConstantId::Phi2Cal => (
            sweeps::measure_phi2_cal()?,
            "sup y²|φ''|/φ; y in [1e2,1e8]; 3 families",
        ),
        ConstantId::CThreshold(f) => (
            sweeps::threshold_for(f)? as f64,
            "smallest n with identity == enumeration on [1, 1e4]",
        ),
    };
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    table.set(&id.key(), value, &format!("{grid}; seed={seed}; unix={stamp}"));
    Ok(value)
}

pub fn calibrate_all(seed: u64, table: &mut ConstantsTable) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for id in ConstantId::all() {
        let v = calibrate(&id, seed, table)?;
        out.push((id.key(), v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_parsing() {
        assert_eq!("K_cal".parse::<ConstantId>().unwrap(), ConstantId::KCal);
        assert_eq!(
            "c_threshold.power:1.5".parse::<ConstantId>().unwrap(),
            ConstantId::CThreshold("power:1.5".into())
        );
        assert!("nonsense".parse::<ConstantId>().is_err());
        assert_eq!(ConstantId::all().len(), 17);
    }
}
