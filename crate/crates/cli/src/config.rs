//! JSON run configuration.

use std::path::{Path, PathBuf};

use msgprol::graph::{Graph, LineageFamily};
use msgprol::msann::TrainConfig;
use msgprol::prolongation::OptimizerConfig;
use msgprol::{Error, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub training: Option<TrainingConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// A family member by side length (vertices for 1D, grid side for 2D).
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub family: LineageFamily,
    pub size: usize,
}

impl GraphConfig {
    pub fn build(&self) -> Result<Graph> {
        self.family.member(self.size)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub coarse: GraphConfig,
    pub fine: GraphConfig,
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_matcher")]
    pub matcher: String,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

fn default_matcher() -> String {
    "munkres".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum TaskConfig {
    Synthetic {
        width: usize,
        #[serde(default = "one")]
        objects: usize,
        #[serde(default)]
        object_length: Option<usize>,
        #[serde(default)]
        noise_p: Option<f64>,
    },
    /// Autoencoding an IDX image file. Relative paths resolve against
    /// `MSGPROL_DATA_DIR` when it is set.
    Idx {
        path: PathBuf,
        #[serde(default)]
        pad_to: Option<usize>,
        #[serde(default)]
        limit: Option<usize>,
    },
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub task: TaskConfig,
    #[serde(default)]
    pub network: TrainConfig,
    /// Train whole cycles until this cost is reached instead of a fixed
    /// cycle count.
    #[serde(default)]
    pub cost_budget: Option<f64>,
    #[serde(default = "default_eval")]
    pub eval_samples: usize,
}

fn default_eval() -> usize {
    1000
}
