//! Run configuration with TOML persistence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::EngineConfig;
use crate::error::{Error, Result};
use crate::inference::Hyperparams;
use crate::scalar::Real;
use crate::scheduler::SelectionRatios;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub docword: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vocab: Option<PathBuf>,
    /// Keep only the first this many vocabulary words.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vocab_keep: Option<usize>,
    pub num_topics: usize,
    /// Defaults to `2 / num_topics`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub beta: f64,
    pub lambda_w: f64,
    /// Power topics per power word; capped at `num_topics`.
    pub lambda_k_times_k: usize,
    pub minibatch_target_nnz: usize,
    pub num_workers: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub max_iterations: u32,
    pub test_fraction: f64,
    pub fold_in_iters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_every_iterations: Option<u32>,
    pub threaded: bool,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            docword: None,
            vocab: None,
            vocab_keep: None,
            num_topics: 50,
            alpha: None,
            beta: 0.01,
            lambda_w: 0.1,
            lambda_k_times_k: 50,
            minibatch_target_nnz: 45_000,
            num_workers: 4,
            seed: 1,
            epsilon: 1e-3,
            max_iterations: 200,
            test_fraction: 0.2,
            fold_in_iters: 500,
            eval_every_iterations: None,
            threaded: true,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(2.0 / self.num_topics.max(1) as f64)
    }

    pub fn ratios(&self) -> Result<SelectionRatios> {
        SelectionRatios::with_topic_budget(self.lambda_w, self.lambda_k_times_k, self.num_topics)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction >= 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must lie in [0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.fold_in_iters == 0 {
            return Err(Error::Config("fold_in_iters must be at least 1".into()));
        }
        if self.vocab_keep == Some(0) {
            return Err(Error::Config("vocab_keep must be at least 1".into()));
        }
        self.engine_config::<f64>().map(|_| ())
    }

    pub fn engine_config<T: Real>(&self) -> Result<EngineConfig<T>> {
        let cfg = EngineConfig {
            hyper: Hyperparams::new(T::of(self.alpha()), T::of(self.beta), self.num_topics)?,
            ratios: self.ratios()?,
            num_workers: self.num_workers,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            minibatch_target_nnz: self.minibatch_target_nnz,
            seed: self.seed,
            threaded: self.threaded,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
