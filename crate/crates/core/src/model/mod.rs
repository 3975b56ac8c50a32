//! Edge denoiser: an MLP over the noisy edge bits and a sinusoidal embedding
//! of the step, predicting `P(x_0 = 1)` for every edge.
//!
//! The network is deliberately flat. It sees the graph as a fixed-length bit
//! vector, so it is tied to one node count and is not permutation
//! equivariant.

mod checkpoint;
mod optim;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use optim::{AdamConfig, OptimizerState};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::pair_count;
use crate::kernel::KernelTables;
use crate::rng::rng_from_seed;

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` inside the loss.
pub const PROB_EPS: f64 = 1e-12;

fn default_hidden() -> Vec<usize> {
    vec![256, 256]
}

fn default_time_embed_dim() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiserConfig {
    pub n_nodes: usize,
    #[serde(default = "default_hidden")]
    pub hidden_sizes: Vec<usize>,
    #[serde(default = "default_time_embed_dim")]
    pub time_embed_dim: usize,
    #[serde(default)]
    pub seed: u64,
}

impl DenoiserConfig {
    pub fn new(n_nodes: usize) -> Self {
        Self { n_nodes, hidden_sizes: default_hidden(), time_embed_dim: default_time_embed_dim(), seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::invalid("n_nodes", format!("{} < 2", self.n_nodes)));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(Error::invalid("hidden_sizes", "every hidden layer needs at least one unit"));
        }
        if self.time_embed_dim % 2 != 0 {
            return Err(Error::invalid("time_embed_dim", "must be even (sin/cos pairs)"));
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        pair_count(self.n_nodes)
    }

    /// `(fan_in, fan_out)` of each dense layer, input to output.
    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_sizes.len() + 1);
        let mut fan_in = self.edge_count() + self.time_embed_dim;
        for &h in &self.hidden_sizes {
            dims.push((fan_in, h));
            fan_in = h;
        }
        dims.push((fan_in, self.edge_count()));
        dims
    }
}

/// Position of one dense layer inside the flat parameter vector. Weights are
/// `fan_out x fan_in`, row-major, followed by `fan_out` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
    pub offset: usize,
}

impl LayerShape {
    fn weights_len(&self) -> usize {
        self.fan_in * self.fan_out
    }

    fn bias_offset(&self) -> usize {
        self.offset + self.weights_len()
    }

    fn end(&self) -> usize {
        self.bias_offset() + self.fan_out
    }
}

fn layout(cfg: &DenoiserConfig) -> Vec<LayerShape> {
    let mut offset = 0;
    cfg.layer_dims()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let shape = LayerShape { fan_in, fan_out, offset };
            offset = shape.end();
            shape
        })
        .collect()
}

/// Sinusoidal embedding `[sin(t w_k), cos(t w_k)]` with `w_k = 10000^(-2k/dim)`.
pub fn time_embedding(t: usize, dim: usize) -> Vec<f64> {
    let half = dim / 2;
    let mut out = Vec::with_capacity(dim);
    let freqs: Vec<f64> = (0..half).map(|k| 10_000f64.powf(-2.0 * k as f64 / dim as f64)).collect();
    out.extend(freqs.iter().map(|w| (t as f64 * w).sin()));
    out.extend(freqs.iter().map(|w| (t as f64 * w).cos()));
    out
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn silu(z: f64) -> f64 {
    z * sigmoid(z)
}

fn silu_grad(z: f64) -> f64 {
    let s = sigmoid(z);
    s * (1.0 + z * (1.0 - s))
}

/// Mean binary cross-entropy over edges, probabilities clamped to `[1e-12, 1 - 1e-12]`.
pub fn bce_loss(probs: &[f64], x0: &[bool]) -> Result<f64> {
    if probs.len() != x0.len() {
        return Err(Error::ShapeMismatch { expected: x0.len(), got: probs.len() });
    }
    let total: f64 = probs
        .iter()
        .zip(x0)
        .map(|(&p, &bit)| {
            let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            if bit {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / probs.len() as f64)
}

/// Anything that can estimate the clean edge bits from a noisy graph.
pub trait X0Predictor: Sync {
    fn node_count(&self) -> usize;

    /// Per-edge `P(x_0 = 1 | x_t)`, each in `[0, 1]`.
    fn predict_x0(&self, xt: &[f64], t: usize, steps: usize) -> Result<Vec<f64>>;
}

/// One supervised example: noisy bits at step `t` and the clean target.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainExample {
    pub xt: Vec<f64>,
    pub t: usize,
    pub x0: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Denoiser {
    config: DenoiserConfig,
    layers: Vec<LayerShape>,
    params: Vec<f64>,
}

/// Activations kept for backprop: the input and every pre-activation.
struct Trace {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
}

impl Denoiser {
    /// Fan-in scaled uniform weights `U(-sqrt(3 / fan_in), sqrt(3 / fan_in))`, zero biases.
    pub fn new(config: DenoiserConfig) -> Result<Self> {
        config.validate()?;
        let layers = layout(&config);
        let mut params = vec![0.0; layers.last().map_or(0, LayerShape::end)];
        let mut rng = rng_from_seed(config.seed);
        for layer in &layers {
            let limit = (3.0 / layer.fan_in as f64).sqrt();
            for w in &mut params[layer.offset..layer.bias_offset()] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(Self { config, layers, params })
    }

    pub(crate) fn from_parts(config: DenoiserConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layers = layout(&config);
        let expected = layers.last().map_or(0, LayerShape::end);
        if params.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: params.len() });
        }
        Ok(Self { config, layers, params })
    }

    pub fn config(&self) -> &DenoiserConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    fn input(&self, xt: &[f64], t: usize, steps: usize) -> Result<Vec<f64>> {
        let edges = self.config.edge_count();
        if xt.len() != edges {
            return Err(Error::ShapeMismatch { expected: edges, got: xt.len() });
        }
        if t == 0 || t > steps {
            return Err(Error::StepOutOfRange { t, max: steps });
        }
        let mut input = Vec::with_capacity(edges + self.config.time_embed_dim);
        input.extend_from_slice(xt);
        input.extend(time_embedding(t, self.config.time_embed_dim));
        Ok(input)
    }

    fn dense(&self, layer: &LayerShape, x: &[f64]) -> Vec<f64> {
        let w = &self.params[layer.offset..layer.bias_offset()];
        let b = &self.params[layer.bias_offset()..layer.end()];
        w.chunks_exact(layer.fan_in)
            .zip(b)
            .map(|(row, bias)| bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    fn forward(&self, input: Vec<f64>) -> Trace {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = self.dense(layer, &act);
            if i + 1 < self.layers.len() {
                act = z.iter().map(|&v| silu(v)).collect();
            }
            pre.push(z);
        }
        Trace { input, pre }
    }

    /// Output logits, one per edge.
    pub fn logits(&self, xt: &[f64], t: usize, steps: usize) -> Result<Vec<f64>> {
        let input = self.input(xt, t, steps)?;
        Ok(self.forward(input).pre.pop().expect("at least one layer"))
    }

    /// Mean loss over the batch.
    pub fn loss(&self, batch: &[TrainExample], steps: usize) -> Result<f64> {
        let mut total = 0.0;
        for ex in batch {
            let probs: Vec<f64> = self.logits(&ex.xt, ex.t, steps)?.into_iter().map(sigmoid).collect();
            total += bce_loss(&probs, &ex.x0)?;
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean loss over the batch and its exact gradient with respect to every parameter.
    pub fn loss_and_grad(&self, batch: &[TrainExample], steps: usize) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::invalid("batch", "empty batch"));
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut total = 0.0;

        for ex in batch {
            if ex.x0.len() != self.config.edge_count() {
                return Err(Error::ShapeMismatch { expected: self.config.edge_count(), got: ex.x0.len() });
            }
            let trace = self.forward(self.input(&ex.xt, ex.t, steps)?);
            let logits = trace.pre.last().expect("at least one layer");
            let probs: Vec<f64> = logits.iter().map(|&z| sigmoid(z)).collect();
            total += bce_loss(&probs, &ex.x0)?;

            // d(mean BCE)/d(logit) is (p - x0) / E, zero where the clamp is active.
            let edges = probs.len() as f64;
            let mut delta: Vec<f64> = probs
                .iter()
                .zip(&ex.x0)
                .map(|(&p, &bit)| {
                    if !(PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
                        0.0
                    } else {
                        scale * (p - if bit { 1.0 } else { 0.0 }) / edges
                    }
                })
                .collect();

            for li in (0..self.layers.len()).rev() {
                let layer = self.layers[li];
                let below: Vec<f64> = if li == 0 {
                    trace.input.clone()
                } else {
                    trace.pre[li - 1].iter().map(|&z| silu(z)).collect()
                };
                let (gw, gb) = grad[layer.offset..layer.end()].split_at_mut(layer.weights_len());
                for (o, &d) in delta.iter().enumerate() {
                    gb[o] += d;
                    if d != 0.0 {
                        for (g, a) in gw[o * layer.fan_in..(o + 1) * layer.fan_in].iter_mut().zip(&below) {
                            *g += d * a;
                        }
                    }
                }
                if li == 0 {
                    break;
                }
                let w = &self.params[layer.offset..layer.bias_offset()];
                let mut back = vec![0.0; layer.fan_in];
                for (o, &d) in delta.iter().enumerate() {
                    if d != 0.0 {
                        for (b, wv) in back.iter_mut().zip(&w[o * layer.fan_in..(o + 1) * layer.fan_in]) {
                            *b += d * wv;
                        }
                    }
                }
                delta = back.iter().zip(&trace.pre[li - 1]).map(|(b, &z)| b * silu_grad(z)).collect();
            }
        }
        Ok((total * scale, grad))
    }

    /// One optimization step on a batch of clean graphs: each example gets its
    /// own `t ~ U{1..T}` and a forward-noised copy. Returns the loss before the
    /// update.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        opt: &mut OptimizerState,
        batch: &[&[bool]],
        tables: &KernelTables,
        rng: &mut R,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::invalid("batch", "empty batch"));
        }
        let steps = tables.steps();
        let examples = batch
            .iter()
            .map(|x0| {
                let t = rng.random_range(1..=steps);
                let xt = tables.sample_forward(x0, t, rng)?;
                Ok(TrainExample { xt: xt.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect(), t, x0: x0.to_vec() })
            })
            .collect::<Result<Vec<_>>>()?;
        let (loss, grad) = self.loss_and_grad(&examples, steps)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { step: opt.step_count() + 1 });
        }
        opt.update(&mut self.params, &grad)?;
        Ok(loss)
    }
}

impl X0Predictor for Denoiser {
    fn node_count(&self) -> usize {
        self.config.n_nodes
    }

    fn predict_x0(&self, xt: &[f64], t: usize, steps: usize) -> Result<Vec<f64>> {
        Ok(self.logits(xt, t, steps)?.into_iter().map(sigmoid).collect())
    }
}
