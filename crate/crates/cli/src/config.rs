//! Versioned JSON configuration for scenario sweeps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use symcost::recovery::OptimizerBudget;
use symcost::tradeoff::DeltaChoice;

pub const SCHEMA: &str = "symcost/1";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unsupported schema {found:?}, expected {SCHEMA:?}")]
    Schema { found: String },
    #[error("no scenarios")]
    NoScenarios,
    #[error("scenario {id:?}: {message}")]
    Scenario { id: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Tradeoff,
    Thermo,
    Petz,
    Scramble,
    Way,
    Gate,
    Nogo,
    Qec,
    Kr,
}

impl Kind {
    /// Parameters that must be present for this kind.
    pub fn required_keys(self) -> &'static [&'static str] {
        match self {
            Kind::Tradeoff => &["implementation"],
            Kind::Thermo => &["implementation", "beta"],
            Kind::Petz => &["d_a", "d_b"],
            Kind::Scramble => &["m", "n", "N", "l"],
            Kind::Way => &["d", "window"],
            Kind::Gate => &["theta", "d", "window"],
            Kind::Nogo => &["theta", "channel"],
            Kind::Qec => &["code"],
            Kind::Kr => &["d"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    pub restarts: usize,
    pub iterations: usize,
}

impl Default for Budget {
    fn default() -> Self {
        let b = OptimizerBudget::default();
        Self {
            restarts: b.restarts,
            iterations: b.iterations,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub kind: Kind,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub optimizer_budget: Budget,
    #[serde(default = "default_delta_choice")]
    pub delta_choice: DeltaChoice,
    /// Multiplies every reported left-hand side; a fault-injection hook for testing the
    /// failure path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_lhs_scale: Option<f64>,
}

fn default_delta_choice() -> DeltaChoice {
    DeltaChoice::D1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_report")]
    pub report: PathBuf,
    #[serde(default = "default_summary")]
    pub summary: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            report: default_report(),
            summary: default_summary(),
        }
    }
}

fn default_report() -> PathBuf {
    PathBuf::from("report.jsonl")
}

fn default_summary() -> PathBuf {
    PathBuf::from("summary.csv")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: String,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    pub scenarios: Vec<ScenarioConfig>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Config = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA {
            return Err(ConfigError::Schema {
                found: self.schema.clone(),
            });
        }
        if self.scenarios.is_empty() {
            return Err(ConfigError::NoScenarios);
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            let fail = |message: String| ConfigError::Scenario {
                id: s.id.clone(),
                message,
            };
            if !seen.insert(s.id.as_str()) {
                return Err(fail("duplicate scenario id".into()));
            }
            if s.seeds.is_empty() {
                return Err(fail("seeds must not be empty".into()));
            }
            for key in s.kind.required_keys() {
                if !s.parameters.contains_key(*key) {
                    return Err(fail(format!("missing parameter {key:?} for kind {:?}", s.kind)));
                }
            }
            OptimizerBudget::new(s.optimizer_budget.restarts, s.optimizer_budget.iterations)
                .map_err(|e| fail(e.to_string()))?;
            if let Some(scale) = s.inject_lhs_scale {
                if !(scale.is_finite() && scale >= 0.0) {
                    return Err(fail(format!("inject_lhs_scale must be a finite nonnegative number, got {scale}")));
                }
            }
        }
        Ok(())
    }

    /// Output paths, relative ones resolved against the directory of the config file.
    pub fn resolve_outputs(&self, config_path: &Path) -> (PathBuf, PathBuf) {
        let base = config_path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        (resolve(&self.output.report), resolve(&self.output.summary))
    }
}

/// Typed access to a scenario's parameter block.
pub struct Params<'a> {
    id: &'a str,
    map: &'a BTreeMap<String, Value>,
}

impl<'a> Params<'a> {
    pub fn new(s: &'a ScenarioConfig) -> Self {
        Self {
            id: &s.id,
            map: &s.parameters,
        }
    }

    fn error(&self, message: String) -> ConfigError {
        ConfigError::Scenario {
            id: self.id.to_string(),
            message,
        }
    }

    fn get(&self, key: &str) -> Result<&'a Value, ConfigError> {
        self.map
            .get(key)
            .ok_or_else(|| self.error(format!("missing parameter {key:?}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.get(key)?
            .as_f64()
            .ok_or_else(|| self.error(format!("parameter {key:?} must be a number")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        if self.map.contains_key(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.get(key)?
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| self.error(format!("parameter {key:?} must be a nonnegative integer")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        if self.map.contains_key(key) {
            self.usize(key)
        } else {
            Ok(default)
        }
    }

    pub fn str(&self, key: &str) -> Result<&'a str, ConfigError> {
        self.get(key)?
            .as_str()
            .ok_or_else(|| self.error(format!("parameter {key:?} must be a string")))
    }

    pub fn str_or(&self, key: &str, default: &'a str) -> Result<&'a str, ConfigError> {
        if self.map.contains_key(key) {
            self.str(key)
        } else {
            Ok(default)
        }
    }

    /// Rejects a value outside the listed choices with a message naming them.
    pub fn choice(&self, key: &str, value: &str, allowed: &[&str]) -> Result<(), ConfigError> {
        if allowed.contains(&value) {
            Ok(())
        } else {
            Err(self.error(format!("parameter {key:?} is {value:?}, expected one of {allowed:?}")))
        }
    }

    /// Maps a string parameter (or `default` when absent) to one of the named options.
    pub fn pick<T: Copy>(&self, key: &str, default: &'a str, options: &[(&str, T)]) -> Result<T, ConfigError> {
        let value = self.str_or(key, default)?;
        match options.iter().find(|(name, _)| *name == value) {
            Some((_, v)) => Ok(*v),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                Err(self.error(format!("parameter {key:?} is {value:?}, expected one of {names:?}")))
            }
        }
    }
}
