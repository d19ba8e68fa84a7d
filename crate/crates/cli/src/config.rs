//! Run configuration: one JSON document, overridable by flags, hashed
//! into every output file header so a data file names the exact setup
//! that produced it.

use drslab_core::space::{SpaceKind, SpaceParams};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Grid sizing shared by the subcommands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Radial truncation for transform-style grids.
    pub s_max: f64,
    /// Radial node budget (floor; oscillation rules may exceed it).
    pub radial_budget: usize,
    /// Points in the default time ladder.
    pub time_points: usize,
    /// Frequency scale the radial grid should resolve.
    pub lambda_hint: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            s_max: 8.0,
            radial_budget: 2048,
            time_points: 257,
            lambda_hint: 12.0,
        }
    }
}

/// Check tolerances that are policy rather than mathematics.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// A slope fit with standard error at or above this is inconclusive.
    pub slope_stderr_max: f64,
    /// Normalized Richardson tail above this marks the kernel check
    /// inconclusive.
    pub tail_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            slope_stderr_max: 0.03,
            tail_tol: 0.02,
        }
    }
}

/// The full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceKind,
    pub grids: GridConfig,
    pub tolerances: ToleranceConfig,
    pub seed: u64,
    /// Worker threads; `None` means available parallelism.
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            space: SpaceKind::DamekRicci { m_v: 2, m_z: 1 },
            grids: GridConfig::default(),
            tolerances: ToleranceConfig::default(),
            seed: 12345,
            workers: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Configuration failures; all exit with status 2.
#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Json(String),
    /// A field failed validation; carries a field-level message.
    Field { field: &'static str, msg: String },
    Space(String),
    Arg { flag: &'static str, msg: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Json(e) => write!(f, "config is not valid JSON: {e}"),
            ConfigError::Field { field, msg } => write!(f, "config field `{field}`: {msg}"),
            ConfigError::Space(s) => write!(
                f,
                "unrecognized space `{s}` (expected h3, rh:<n>, or dr:<m_v>,<m_z>)"
            ),
            ConfigError::Arg { flag, msg } => write!(f, "flag `{flag}`: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Json(e.to_string()))
    }

    /// Field-level validation against module preconditions.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.space_params()?;
        if !(self.grids.s_max > 0.0 && self.grids.s_max.is_finite()) {
            return Err(ConfigError::Field {
                field: "grids.s_max",
                msg: format!("must be positive and finite, got {}", self.grids.s_max),
            });
        }
        if self.grids.radial_budget < 64 {
            return Err(ConfigError::Field {
                field: "grids.radial_budget",
                msg: format!("must be at least 64, got {}", self.grids.radial_budget),
            });
        }
        if self.grids.time_points < 2 {
            return Err(ConfigError::Field {
                field: "grids.time_points",
                msg: format!("must be at least 2, got {}", self.grids.time_points),
            });
        }
        if !(self.grids.lambda_hint >= 0.0 && self.grids.lambda_hint.is_finite()) {
            return Err(ConfigError::Field {
                field: "grids.lambda_hint",
                msg: format!("must be nonnegative, got {}", self.grids.lambda_hint),
            });
        }
        if !(self.tolerances.slope_stderr_max > 0.0) {
            return Err(ConfigError::Field {
                field: "tolerances.slope_stderr_max",
                msg: "must be positive".into(),
            });
        }
        if !(self.tolerances.tail_tol > 0.0) {
            return Err(ConfigError::Field {
                field: "tolerances.tail_tol",
                msg: "must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn space_params(&self) -> Result<SpaceParams, ConfigError> {
        SpaceParams::from_kind(self.space).map_err(|e| ConfigError::Field {
            field: "space",
            msg: e.to_string(),
        })
    }

    /// FNV-1a hash of the canonical JSON serialization; embedded in every
    /// output file so data can be traced to its configuration. Only
    /// value-affecting fields count: the output directory and worker count
    /// are plumbing, and results are worker-count independent.
    pub fn hash(&self) -> u64 {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        canonical.workers = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Parse a space label: `h3`, `rh:<n>`, or `dr:<m_v>,<m_z>`.
pub fn parse_space(text: &str) -> Result<SpaceKind, ConfigError> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("h3") {
        return Ok(SpaceKind::RealHyperbolic { n: 3 });
    }
    if let Some(rest) = t.strip_prefix("rh:") {
        let n: usize = rest
            .trim()
            .parse()
            .map_err(|_| ConfigError::Space(text.into()))?;
        return Ok(SpaceKind::RealHyperbolic { n });
    }
    if let Some(rest) = t.strip_prefix("dr:") {
        let mut parts = rest.split(',');
        let m_v = parts
            .next()
            .and_then(|p| p.trim().parse::<usize>().ok())
            .ok_or_else(|| ConfigError::Space(text.into()))?;
        let m_z = parts
            .next()
            .and_then(|p| p.trim().parse::<usize>().ok())
            .ok_or_else(|| ConfigError::Space(text.into()))?;
        if parts.next().is_some() {
            return Err(ConfigError::Space(text.into()));
        }
        return Ok(SpaceKind::DamekRicci { m_v, m_z });
    }
    Err(ConfigError::Space(text.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_labels_parse() {
        assert_eq!(parse_space("h3").unwrap(), SpaceKind::RealHyperbolic { n: 3 });
        assert_eq!(
            parse_space("rh:4").unwrap(),
            SpaceKind::RealHyperbolic { n: 4 }
        );
        assert_eq!(
            parse_space("dr:2,1").unwrap(),
            SpaceKind::DamekRicci { m_v: 2, m_z: 1 }
        );
        assert!(parse_space("euclid").is_err());
        assert!(parse_space("dr:2").is_err());
        assert!(parse_space("dr:2,1,5").is_err());
    }

    #[test]
    fn hash_stable_under_reserialization() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let cfg2: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg.hash(), cfg2.hash());
        let mut cfg3 = cfg.clone();
        cfg3.seed = 1;
        assert_ne!(cfg.hash(), cfg3.hash());
    }

    #[test]
    fn validation_reports_fields() {
        let mut cfg = RunConfig::default();
        cfg.grids.s_max = -1.0;
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("grids.s_max"), "{msg}");
        let mut cfg = RunConfig::default();
        cfg.space = SpaceKind::DamekRicci { m_v: 3, m_z: 1 };
        assert!(cfg.validate().is_err());
    }
}
