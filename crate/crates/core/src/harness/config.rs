//! Experiment configuration: flat key = value files with CLI-flag override
//! semantics (keys match flag names; flags win).

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<OutputFormat> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("format \"{s}\" is not csv|json"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub family: Option<String>,
    pub c: Option<f64>,
    pub sigma0: Option<f64>,
    pub n_max: Option<u64>,
    pub lambda: Option<f64>,
    pub k_max: Option<u32>,
    pub system: Option<String>,
    pub observables: Option<String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub constants: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            family: None,
            c: None,
            sigma0: None,
            n_max: None,
            lambda: None,
            k_max: None,
            system: None,
            observables: None,
            seed: 1,
            out: None,
            format: OutputFormat::Csv,
            constants: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let text = std::fs::read_to_string(path)?;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {} has no '='", ln + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Assign one key; keys match the CLI flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad {what} value \"{value}\""));
        match key {
            "family" => self.family = Some(value.to_string()),
            "c" => self.c = Some(value.parse().map_err(|_| bad("c"))?),
            "sigma0" => self.sigma0 = Some(value.parse().map_err(|_| bad("sigma0"))?),
            "n-max" => self.n_max = Some(value.parse().map_err(|_| bad("n-max"))?),
            "lambda" => self.lambda = Some(value.parse().map_err(|_| bad("lambda"))?),
            "k-max" => self.k_max = Some(value.parse().map_err(|_| bad("k-max"))?),
            "system" => self.system = Some(value.to_string()),
            "observables" => self.observables = Some(value.to_string()),
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "constants" => self.constants = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unrecognized config key \"{key}\""))),
        }
        Ok(())
    }

    /// Resolved family spec: `--family` possibly combined with `--c`
    /// ("power" + c, or a full "power:1.5" string).
    pub fn family_spec(&self, default: &str) -> String {
        let base = self.family.clone().unwrap_or_else(|| default.to_string());
        match self.c {
            Some(c) if !base.contains(':') => format!("{base}:{c}"),
            Some(c) => {
                // replace the c slot of an explicit spec
                let mut parts: Vec<String> = base.split(':').map(str::to_string).collect();
                if parts.len() >= 2 {
                    parts[1] = format!("{c}");
                }
                parts.join(":")
            }
            None => base,
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("reports"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parse_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("exp.cfg");
        std::fs::write(
            &p,
            "# comment\nfamily = power:1.5\nn-max = 4096\nseed = 9\nformat = json\n",
        )
        .unwrap();
        let mut cfg = ExperimentConfig::from_file(&p).unwrap();
        assert_eq!(cfg.family.as_deref(), Some("power:1.5"));
        assert_eq!(cfg.n_max, Some(4096));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.format, OutputFormat::Json);
        // flag override wins
        cfg.set("n-max", "128").unwrap();
        assert_eq!(cfg.n_max, Some(128));
        assert!(cfg.set("frobnicate", "1").is_err());
        assert!(cfg.set("c", "x").is_err());
    }

    #[test]
    fn family_spec_resolution() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.family_spec("power:1.02"), "power:1.02");
        cfg.c = Some(1.5);
        assert_eq!(cfg.family_spec("power:1.02"), "power:1.5");
        cfg.family = Some("powerlog:1.02:1".into());
        assert_eq!(cfg.family_spec(""), "powerlog:1.5:1");
        cfg.c = None;
        assert_eq!(cfg.family_spec(""), "powerlog:1.02:1");
    }
}
