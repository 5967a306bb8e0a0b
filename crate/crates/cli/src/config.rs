//! Experiment configuration: a flat `key = value` file plus overrides.
//!
//! ```text
//! # lines starting with # are comments
//! suite   = rok2d
//! system  = lat:3
//! window  = 40
//! seed    = 42
//! samples = 1000
//! n = 2
//! m = 3
//! jmax = auto          # or an integer
//! horizon = auto
//! ```
//!
//! Overrides (`key=value` pairs from the command line) win over the
//! file. Unknown keys are configuration errors.

use markerlab::SystemSpec;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {0}: expected 'key = value'")]
    BadLine(usize),
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("bad value for '{key}': {value}")]
    BadValue { key: String, value: String },
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("unknown system descriptor '{0}'")]
    UnknownSystem(String),
    #[error("missing required key '{0}'")]
    Missing(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Suite {
    Freeness,
    Markers1d,
    Rok2d,
    Rokd,
    CobA,
    CobB,
    Transfer,
}

impl Suite {
    pub fn parse(text: &str) -> Result<Suite, ConfigError> {
        Ok(match text {
            "freeness" => Suite::Freeness,
            "markers1d" => Suite::Markers1d,
            "rok2d" => Suite::Rok2d,
            "rokd" => Suite::Rokd,
            "cob-a" => Suite::CobA,
            "cob-b" => Suite::CobB,
            "transfer" => Suite::Transfer,
            other => return Err(ConfigError::UnknownSuite(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Freeness => "freeness",
            Suite::Markers1d => "markers1d",
            Suite::Rok2d => "rok2d",
            Suite::Rokd => "rokd",
            Suite::CobA => "cob-a",
            Suite::CobB => "cob-b",
            Suite::Transfer => "transfer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    #[serde(serialize_with = "ser_system")]
    pub system: SystemSpec,
    pub window: i64,
    pub seed: u64,
    pub samples: u64,
    pub depth: u32,
    pub n: u32,
    pub m: u32,
    pub bounds: Vec<u32>,
    /// None means "auto": derived from the window for lattice systems.
    pub jmax: Option<u64>,
    pub horizon: Option<u64>,
    pub len: u64,
    pub starts: u64,
    pub rmax: u32,
    pub r: u32,
    pub witnesses: u64,
    pub freeness_window: i64,
    pub out: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum OutputFormat {
    Json,
    Csv,
}

fn ser_system<S: serde::Serializer>(sys: &SystemSpec, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&sys.descriptor())
}

impl ExperimentConfig {
    pub fn defaults(suite: Suite) -> Self {
        ExperimentConfig {
            suite,
            system: SystemSpec::LabeledLattice { labels: 3 },
            window: 40,
            seed: 42,
            samples: 1000,
            depth: 5,
            n: 2,
            m: 3,
            bounds: vec![2, 2, 2],
            jmax: None,
            horizon: None,
            len: 10_000,
            starts: 100,
            rmax: 3,
            r: 2,
            witnesses: 10,
            freeness_window: 10,
            out: None,
            format: OutputFormat::Json,
        }
    }

    /// Parse a config file body; `overrides` win.
    pub fn from_sources(
        suite: Suite,
        file_body: Option<&str>,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults(suite);
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        if let Some(body) = file_body {
            for (idx, line) in body.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or(ConfigError::BadLine(idx + 1))?;
                let v = v.split('#').next().unwrap_or(v);
                pairs.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        for (k, v) in overrides {
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
        for (k, v) in pairs {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |key: &str, value: &str| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "suite" => self.suite = Suite::parse(value)?,
            "system" => {
                self.system = SystemSpec::parse(value)
                    .ok_or_else(|| ConfigError::UnknownSystem(value.to_string()))?
            }
            "window" => self.window = value.parse().map_err(|_| bad(key, value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "samples" => self.samples = value.parse().map_err(|_| bad(key, value))?,
            "depth" => self.depth = value.parse().map_err(|_| bad(key, value))?,
            "n" => self.n = value.parse().map_err(|_| bad(key, value))?,
            "m" => self.m = value.parse().map_err(|_| bad(key, value))?,
            "bounds" => {
                self.bounds = value
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<Result<Vec<u32>, _>>()
                    .map_err(|_| bad(key, value))?
            }
            "jmax" => {
                self.jmax = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad(key, value))?)
                }
            }
            "horizon" => {
                self.horizon = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad(key, value))?)
                }
            }
            "len" => self.len = value.parse().map_err(|_| bad(key, value))?,
            "starts" => self.starts = value.parse().map_err(|_| bad(key, value))?,
            "rmax" => self.rmax = value.parse().map_err(|_| bad(key, value))?,
            "r" => self.r = value.parse().map_err(|_| bad(key, value))?,
            "witnesses" => self.witnesses = value.parse().map_err(|_| bad(key, value))?,
            "freeness_window" => {
                self.freeness_window = value.parse().map_err(|_| bad(key, value))?
            }
            "out" => self.out = Some(value.to_string()),
            "format" => {
                self.format = match value {
                    "json" => OutputFormat::Json,
                    "csv" => OutputFormat::Csv,
                    _ => return Err(bad(key, value)),
                }
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.window < 0 {
            return Err(ConfigError::BadValue {
                key: "window".into(),
                value: self.window.to_string(),
            });
        }
        if self.samples == 0 || self.len == 0 || self.starts == 0 {
            return Err(ConfigError::BadValue {
                key: "samples/len/starts".into(),
                value: "must be positive".into(),
            });
        }
        if self.rmax == 0 || self.depth == 0 || self.n == 0 || self.m == 0 {
            return Err(ConfigError::Missing("positive construction sizes".into()));
        }
        // Stage enumeration is quadratic in the index-set size.
        let grid = self.n as u64 * self.m as u64;
        let bounds_grid: u64 = self.bounds.iter().map(|&b| b.max(1) as u64).product();
        if grid > 4096 || bounds_grid > 4096 {
            return Err(ConfigError::BadValue {
                key: "n*m / bounds".into(),
                value: "index set larger than 4096".into(),
            });
        }
        Ok(())
    }

    /// Effective walk horizon.
    pub fn horizon_for(&self, sys: SystemSpec) -> u64 {
        if let Some(h) = self.horizon {
            return h;
        }
        match sys {
            SystemSpec::LabeledLattice { .. } => markerlab::defaults::lattice_horizon(self.window),
            SystemSpec::Lattice3 { .. } => markerlab::defaults::lattice3_horizon(self.window),
            _ => markerlab::defaults::WALK_HORIZON_1D,
        }
    }

    /// Effective stratum bound.
    pub fn jmax_for(&self, sys: SystemSpec) -> u64 {
        if let Some(j) = self.jmax {
            return j;
        }
        match sys {
            SystemSpec::LabeledLattice { .. } => {
                markerlab::defaults::lattice_jmax(self.window) as u64
            }
            SystemSpec::Lattice3 { .. } => markerlab::defaults::lattice3_jmax(self.window) as u64,
            _ => markerlab::defaults::JMAX_NONLATTICE as u64,
        }
    }
}
