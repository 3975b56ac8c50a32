//! Training loop and reverse-diffusion sampling.
//!
//! Sampling starts from the kernel's Erdős–Rényi prior and walks `t = T..1`.
//! At each step the predicted clean-edge probability `p` mixes the two exact
//! posteriors: `P(x_{t-1} = 1 | x_t) = p q(x_{t-1} = 1 | x_t, 1) + (1 - p) q(x_{t-1} = 1 | x_t, 0)`.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{pair_count, DatasetSource, Graph, GraphDataset};
use crate::kernel::KernelTables;
use crate::model::{AdamConfig, Denoiser, DenoiserConfig, OptimizerState, X0Predictor};
use crate::rng::rng_from_seed;

fn default_epochs() -> usize {
    30
}
fn default_batch_size() -> usize {
    16
}
fn default_learning_rate() -> f64 {
    1e-3
}
fn default_probe_epochs() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_probe_epochs")]
    pub early_probe_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: default_epochs(),
            batch_size: default_batch_size(),
            learning_rate: default_learning_rate(),
            seed: 0,
            early_probe_epochs: default_probe_epochs(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("train.epochs: must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("train.batch_size: must be at least 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate < 0.0 {
            return Err(Error::Config(format!("train.learning_rate: {} must be non-negative", self.learning_rate)));
        }
        if self.early_probe_epochs == 0 || self.early_probe_epochs > self.epochs {
            return Err(Error::Config(format!(
                "train.early_probe_epochs: {} must be in 1..={}",
                self.early_probe_epochs, self.epochs
            )));
        }
        Ok(())
    }
}

/// Mean training loss per epoch.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LossHistory {
    pub epoch_losses: Vec<f64>,
}

impl LossHistory {
    /// Mean of the first `epochs` entries.
    pub fn early_mean(&self, epochs: usize) -> Result<f64> {
        if epochs == 0 || epochs > self.epoch_losses.len() {
            return Err(Error::invalid("epochs", format!("{epochs} outside 1..={}", self.epoch_losses.len())));
        }
        Ok(self.epoch_losses[..epochs].iter().sum::<f64>() / epochs as f64)
    }

    /// `epoch,mean_loss` rows, epochs counted from 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "epoch,mean_loss")?;
        for (i, loss) in self.epoch_losses.iter().enumerate() {
            writeln!(out, "{},{loss}", i + 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub denoiser: Denoiser,
    pub optimizer: OptimizerState,
    pub history: LossHistory,
}

fn check_dataset(ds: &GraphDataset, model_cfg: &DenoiserConfig) -> Result<()> {
    match ds.uniform_node_count() {
        Some(n) if n == model_cfg.n_nodes => Ok(()),
        Some(n) => Err(Error::invalid("dataset", format!("graphs have {n} nodes, model expects {}", model_cfg.n_nodes))),
        None => Err(Error::invalid("dataset", "graphs differ in node count; training needs a fixed size")),
    }
}

fn run_training(
    ds: &GraphDataset,
    tables: &KernelTables,
    model_cfg: &DenoiserConfig,
    train_cfg: &TrainConfig,
    epochs: usize,
) -> Result<Trained> {
    check_dataset(ds, model_cfg)?;
    if train_cfg.batch_size == 0 {
        return Err(Error::invalid("batch_size", "must be at least 1"));
    }
    let mut denoiser = Denoiser::new(model_cfg.clone())?;
    let mut optimizer = OptimizerState::new(
        denoiser.param_count(),
        AdamConfig { learning_rate: train_cfg.learning_rate, ..AdamConfig::default() },
    );
    let mut rng = rng_from_seed(train_cfg.seed);
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut history = LossHistory::default();

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for chunk in order.chunks(train_cfg.batch_size) {
            let batch: Vec<&[bool]> = chunk.iter().map(|&i| ds.graphs[i].bits()).collect();
            let loss = denoiser.train_step(&mut optimizer, &batch, tables, &mut rng)?;
            weighted += loss * chunk.len() as f64;
        }
        history.epoch_losses.push(weighted / ds.len() as f64);
    }
    Ok(Trained { denoiser, optimizer, history })
}

/// Trains a fresh denoiser on `ds` for `train_cfg.epochs` epochs of seeded,
/// shuffled mini-batches.
pub fn train(ds: &GraphDataset, tables: &KernelTables, model_cfg: &DenoiserConfig, train_cfg: &TrainConfig) -> Result<Trained> {
    if train_cfg.epochs == 0 {
        return Err(Error::invalid("epochs", "must be at least 1"));
    }
    run_training(ds, tables, model_cfg, train_cfg, train_cfg.epochs)
}

/// Mean training loss over the first `early_probe_epochs` epochs.
///
/// Only those epochs are trained; because training consumes its random stream
/// epoch by epoch, the value equals the early mean of a full-length run.
pub fn early_loss_probe(
    ds: &GraphDataset,
    tables: &KernelTables,
    model_cfg: &DenoiserConfig,
    train_cfg: &TrainConfig,
) -> Result<f64> {
    let k = train_cfg.early_probe_epochs;
    if k == 0 || train_cfg.epochs < k {
        return Err(Error::invalid("early_probe_epochs", format!("{k} must be in 1..={}", train_cfg.epochs)));
    }
    run_training(ds, tables, model_cfg, train_cfg, k)?.history.early_mean(k)
}

/// `P(x_{t-1} = 1 | x_t, x_0)` for both `x_t` and both `x_0`, `None` where the
/// conditioning event is impossible.
fn posterior_table(tables: &KernelTables, t: usize) -> Result<[[Option<f64>; 2]; 2]> {
    let mut out = [[None; 2]; 2];
    for xt in [false, true] {
        for x0 in [false, true] {
            out[xt as usize][x0 as usize] = match tables.posterior_prob(t, xt, x0) {
                Ok(p) => Some(p),
                Err(Error::ImpossibleConditioning { .. }) => None,
                Err(e) => return Err(e),
            };
        }
    }
    Ok(out)
}

/// Probability that `x_{t-1} = 1` given `x_t` and a predicted `P(x_0 = 1) = p_hat`.
///
/// A clean value that could not have produced `x_t` has zero likelihood and is
/// dropped from the mixture; if neither can, the state is unreachable.
fn mixed_posterior(post: &[[Option<f64>; 2]; 2], t: usize, xt: bool, p_hat: f64) -> Result<f64> {
    match post[xt as usize] {
        [Some(from0), Some(from1)] => Ok(p_hat * from1 + (1.0 - p_hat) * from0),
        [Some(from0), None] => Ok(from0),
        [None, Some(from1)] => Ok(from1),
        [None, None] => Err(Error::ImpossibleConditioning { t, xt: xt as u8, x0: 0 }),
    }
}

/// One ancestral step `x_t -> x_{t-1}`.
pub fn reverse_step<P, R>(predictor: &P, tables: &KernelTables, xt: &[bool], t: usize, rng: &mut R) -> Result<Vec<bool>>
where
    P: X0Predictor + ?Sized,
    R: Rng + ?Sized,
{
    let steps = tables.steps();
    let input: Vec<f64> = xt.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let p_hat = predictor.predict_x0(&input, t, steps)?;
    if p_hat.len() != xt.len() {
        return Err(Error::ShapeMismatch { expected: xt.len(), got: p_hat.len() });
    }
    let post = posterior_table(tables, t)?;
    xt.iter()
        .zip(&p_hat)
        .map(|(&bit, &p)| Ok(rng.random::<f64>() < mixed_posterior(&post, t, bit, p)?))
        .collect()
}

/// `x_T`: every edge drawn independently from the prior edge probability.
pub fn sample_prior_bits<R: Rng + ?Sized>(tables: &KernelTables, edges: usize, rng: &mut R) -> Result<Vec<bool>> {
    let p = tables.schedule().prior_prob()?;
    Ok((0..edges).map(|_| rng.random::<f64>() < p).collect())
}

/// Draws `count` graphs by reverse diffusion. Each graph runs on its own
/// stream seeded from `rng`, so the result does not depend on thread count.
pub fn sample_graphs<P, R>(predictor: &P, tables: &KernelTables, count: usize, rng: &mut R) -> Result<GraphDataset>
where
    P: X0Predictor + ?Sized,
    R: Rng + ?Sized,
{
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    let n = predictor.node_count();
    let edges = pair_count(n);
    let prior_p = tables.schedule().prior_prob()?;
    let seeds: Vec<u64> = (0..count).map(|_| rng.next_u64()).collect();
    let graphs = seeds
        .into_par_iter()
        .map(|seed| {
            let mut rng = rng_from_seed(seed);
            let mut x = sample_prior_bits(tables, edges, &mut rng)?;
            for t in (1..=tables.steps()).rev() {
                x = reverse_step(predictor, tables, &x, t, &mut rng)?;
            }
            Graph::from_bits(n, x)
        })
        .collect::<Result<Vec<_>>>()?;
    GraphDataset::new(graphs, DatasetSource::Sampled { prior_p })
}

/// Predictor that always reports one fixed graph as the clean data.
#[derive(Debug, Clone)]
pub struct KnownGraph {
    graph: Graph,
}

impl KnownGraph {
    pub fn new(graph: Graph) -> Self {
        Self { graph }
    }
}

impl X0Predictor for KnownGraph {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn predict_x0(&self, xt: &[f64], _t: usize, _steps: usize) -> Result<Vec<f64>> {
        if xt.len() != self.graph.bits().len() {
            return Err(Error::ShapeMismatch { expected: self.graph.bits().len(), got: xt.len() });
        }
        Ok(self.graph.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }
}
