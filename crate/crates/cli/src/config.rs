//! Run configuration: one TOML file per experiment, echoed into every report.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use partition_oracle::applications::TesterConfig;
use partition_oracle::oracle::{derive_params, Overrides, ParamMode};
use partition_oracle::OracleParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A parameter override as written in the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(v) => write!(f, "{v}"),
            Self::Float(v) => write!(f, "{v}"),
            Self::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub samples: usize,
    pub piece_cap: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { samples: 1000, piece_cap: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusConfig {
    /// Largest graph an exhaustive census runs on without `--force`.
    pub max_n: usize,
}

impl Default for CensusConfig {
    fn default() -> Self {
        Self { max_n: 5000 }
    }
}

/// Values measured by a calibration run and checked by later runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    /// Cut fraction of the 50×50 grid partition at `grid_seed`.
    pub grid50_cut_fraction: f64,
    pub grid_seed: u64,
    /// Largest tester cut estimate seen on the 30×30 grid over seeds 0..10.
    pub grid30_cut_estimate_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_mode")]
    pub mode: ParamMode,
    #[serde(default)]
    pub params: BTreeMap<String, Scalar>,
    /// Absent means the `ε/4` default thresholds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tester: Option<TesterConfig>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub census: CensusConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_mode() -> ParamMode {
    ParamMode::Explicit
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            graph: None,
            seed: 0,
            epsilon: default_epsilon(),
            mode: default_mode(),
            params: BTreeMap::new(),
            tester: None,
            estimator: EstimatorConfig::default(),
            census: CensusConfig::default(),
            calibration: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Applies a `key=value` parameter override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            bail!("override {assignment:?} is not of the form key=value");
        };
        let (key, value) = (key.trim(), value.trim());
        let scalar = if let Ok(i) = value.parse::<i64>() {
            Scalar::Int(i)
        } else if let Ok(x) = value.parse::<f64>() {
            Scalar::Float(x)
        } else {
            Scalar::Text(value.to_string())
        };
        self.params.insert(key.to_string(), scalar);
        Ok(())
    }

    pub fn overrides(&self) -> Overrides {
        self.params.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }

    /// Oracle parameters for a graph with degree bound `d`.
    pub fn oracle_params(&self, d: usize) -> Result<OracleParams> {
        Ok(derive_params(self.epsilon, d.max(2), self.mode, &self.overrides())?)
    }

    pub fn tester_config(&self) -> TesterConfig {
        self.tester.clone().unwrap_or_else(|| TesterConfig::new(self.epsilon))
    }

    pub fn graph_path(&self) -> Result<&Path> {
        self.graph.as_deref().context("no graph given (use --graph or set `graph` in the config)")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}
