//! Experiment configuration: a versioned JSON object.
//!
//! Every section except `dataset` is optional; omitted fields take the defaults
//! below. Unknown keys, duplicate keys and out-of-range values are rejected
//! with a message naming the offending field.
//!
//! ```json
//! {
//!   "version": 1,
//!   "seed": 0,
//!   "dataset": {
//!     "generator": { "kind": "community_small", "nodes": [12, 20], "p_intra": 0.7, "inter_edge_rate": 0.05 },
//!     "count": 200,
//!     "seed": null
//!   },
//!   "kernel": { "p_grid": [0.0, 0.05, "...", 1.0], "scale_c": 0.5, "steps": 100, "ramp_frac": 0.8 },
//!   "model": { "hidden_sizes": [256, 256], "time_embed_dim": 32 },
//!   "train": { "epochs": 30, "batch_size": 16, "learning_rate": 0.001, "early_probe_epochs": 10 },
//!   "eval": { "n_generated": 64, "mmd": { "sigma": 1.0, "orbit_sigma": 30.0 } },
//!   "seeds": [0, 1, 2],
//!   "workers": 0,
//!   "record_wall_time": false,
//!   "output_dir": "results"
//! }
//! ```
//!
//! Generators accept inclusive node-count ranges; training (and therefore the
//! sweep) needs a fixed size, e.g. `"nodes": [12, 12]`.
//! `dataset.seed: null` derives the dataset seed from the global `seed`.
//! `workers: 0` uses one worker per available core.
//! `record_wall_time: false` leaves the `wall_time_s` column of result CSVs
//! empty so reruns are byte-identical; measured times always go to `timings.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diffusion::TrainConfig;
use crate::error::{Error, Result};
use crate::graphs::DatasetSpec;
use crate::mmd::MmdConfig;
use crate::model::DenoiserConfig;

pub const CONFIG_VERSION: u32 = 1;

fn default_version() -> u32 {
    CONFIG_VERSION
}
fn default_count() -> usize {
    200
}
/// `{0, 0.05, ..., 1}`, computed as `i / 20` so every point is the nearest double.
pub fn default_p_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}
fn default_scale_c() -> f64 {
    0.5
}
fn default_steps() -> usize {
    100
}
fn default_ramp_frac() -> f64 {
    0.8
}
fn default_hidden_sizes() -> Vec<usize> {
    vec![256, 256]
}
fn default_time_embed_dim() -> usize {
    32
}
fn default_n_generated() -> usize {
    64
}
fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub generator: DatasetSpec,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "default_scale_c")]
    pub scale_c: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_ramp_frac")]
    pub ramp_frac: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { p_grid: default_p_grid(), scale_c: default_scale_c(), steps: default_steps(), ramp_frac: default_ramp_frac() }
    }
}

/// Denoiser architecture; the node count comes from the dataset and the
/// initialization seed from the sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_hidden_sizes")]
    pub hidden_sizes: Vec<usize>,
    #[serde(default = "default_time_embed_dim")]
    pub time_embed_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { hidden_sizes: default_hidden_sizes(), time_embed_dim: default_time_embed_dim() }
    }
}

impl ModelConfig {
    pub fn denoiser(&self, n_nodes: usize, seed: u64) -> DenoiserConfig {
        DenoiserConfig { n_nodes, hidden_sizes: self.hidden_sizes.clone(), time_embed_dim: self.time_embed_dim, seed }
    }
}

/// Training hyperparameters; the shuffling seed comes from the sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_train_epochs")]
    pub epochs: usize,
    #[serde(default = "default_train_batch")]
    pub batch_size: usize,
    #[serde(default = "default_train_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_train_probe")]
    pub early_probe_epochs: usize,
}

fn default_train_epochs() -> usize {
    TrainConfig::default().epochs
}
fn default_train_batch() -> usize {
    TrainConfig::default().batch_size
}
fn default_train_lr() -> f64 {
    TrainConfig::default().learning_rate
}
fn default_train_probe() -> usize {
    TrainConfig::default().early_probe_epochs
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            epochs: default_train_epochs(),
            batch_size: default_train_batch(),
            learning_rate: default_train_lr(),
            early_probe_epochs: default_train_probe(),
        }
    }
}

impl TrainSection {
    pub fn with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed,
            early_probe_epochs: self.early_probe_epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default = "default_n_generated")]
    pub n_generated: usize,
    #[serde(default)]
    pub mmd: MmdConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { n_generated: default_n_generated(), mmd: MmdConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn config_err(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {reason}"))
}

fn check_prob(field: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(config_err(field, format_args!("{p} outside [0, 1]")))
    }
}

impl ExperimentConfig {
    /// A config with every default and the given dataset.
    pub fn with_dataset(generator: DatasetSpec, count: usize) -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 0,
            dataset: DatasetConfig { generator, count, seed: None },
            kernel: KernelConfig::default(),
            model: ModelConfig::default(),
            train: TrainSection::default(),
            eval: EvalConfig::default(),
            seeds: default_seeds(),
            workers: 0,
            record_wall_time: false,
            output_dir: default_output_dir(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(config_err("version", format_args!("unsupported version {} (expected {CONFIG_VERSION})", self.version)));
        }
        self.dataset.generator.validate()?;
        if self.dataset.count < 2 {
            return Err(config_err("dataset.count", "need at least 2 graphs to form train and reference halves"));
        }

        let k = &self.kernel;
        if k.p_grid.is_empty() {
            return Err(config_err("kernel.p_grid", "must not be empty"));
        }
        for (i, &p) in k.p_grid.iter().enumerate() {
            check_prob(&format!("kernel.p_grid[{i}]"), p)?;
            if i > 0 && p <= k.p_grid[i - 1] {
                return Err(config_err(&format!("kernel.p_grid[{i}]"), "values must be strictly increasing"));
            }
        }
        if !(k.scale_c > 0.0 && k.scale_c <= 0.5) {
            return Err(config_err("kernel.scale_c", format_args!("{} outside (0, 0.5]", k.scale_c)));
        }
        if k.steps == 0 {
            return Err(config_err("kernel.steps", "must be at least 1"));
        }
        if !(k.ramp_frac > 0.0 && k.ramp_frac <= 1.0) {
            return Err(config_err("kernel.ramp_frac", format_args!("{} outside (0, 1]", k.ramp_frac)));
        }

        if self.model.time_embed_dim % 2 != 0 {
            return Err(config_err("model.time_embed_dim", "must be even (sin/cos pairs)"));
        }
        if let Some(i) = self.model.hidden_sizes.iter().position(|&h| h == 0) {
            return Err(config_err(&format!("model.hidden_sizes[{i}]"), "layers need at least one unit"));
        }

        let t = &self.train;
        if t.epochs == 0 {
            return Err(config_err("train.epochs", "must be at least 1"));
        }
        if t.batch_size == 0 {
            return Err(config_err("train.batch_size", "must be at least 1"));
        }
        if !(t.learning_rate.is_finite() && t.learning_rate > 0.0) {
            return Err(config_err("train.learning_rate", "must be positive and finite"));
        }
        if t.early_probe_epochs == 0 || t.early_probe_epochs > t.epochs {
            return Err(config_err("train.early_probe_epochs", format_args!("must be in 1..={}", t.epochs)));
        }

        if self.eval.n_generated == 0 {
            return Err(config_err("eval.n_generated", "must be at least 1"));
        }
        self.eval.mmd.validate()?;

        if self.seeds.is_empty() {
            return Err(config_err("seeds", "must not be empty"));
        }
        for (i, s) in self.seeds.iter().enumerate() {
            if self.seeds[..i].contains(s) {
                return Err(config_err(&format!("seeds[{i}]"), format_args!("duplicate seed {s}")));
            }
        }
        Ok(())
    }
}

/// Parses and validates a config from JSON text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::Config(inner.to_string())
        } else {
            config_err(&path, inner)
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
