//! Versioned JSON checkpoints: model config, per-layer weights (row-major,
//! input layer first) and optimizer state.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Denoiser, DenoiserConfig, OptimizerState};
use crate::error::{Error, Result};

const FORMAT: &str = "graphdiff-checkpoint";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    fan_in: usize,
    fan_out: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    config: DenoiserConfig,
    layers: Vec<LayerRecord>,
    optimizer: OptimizerState,
}

pub fn save_checkpoint(d: &Denoiser, opt: &OptimizerState, path: impl AsRef<Path>) -> Result<()> {
    let layers = d
        .layers()
        .iter()
        .map(|l| LayerRecord {
            fan_in: l.fan_in,
            fan_out: l.fan_out,
            weights: d.params()[l.offset..l.bias_offset()].to_vec(),
            bias: d.params()[l.bias_offset()..l.end()].to_vec(),
        })
        .collect();
    let file = CheckpointFile {
        format: FORMAT.into(),
        version: VERSION,
        config: d.config().clone(),
        layers,
        optimizer: opt.clone(),
    };
    fs::write(path, serde_json::to_vec(&file)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Denoiser, OptimizerState)> {
    let bytes = fs::read(path)?;
    let file: CheckpointFile =
        serde_json::from_slice(&bytes).map_err(|e| Error::Checkpoint(format!("unreadable checkpoint: {e}")))?;
    if file.format != FORMAT || file.version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint {} v{} (expected {FORMAT} v{VERSION})",
            file.format, file.version
        )));
    }

    let expected = super::layout(&file.config);
    if expected.len() != file.layers.len() {
        return Err(Error::Checkpoint(format!(
            "config describes {} layers, file has {}",
            expected.len(),
            file.layers.len()
        )));
    }
    let mut params = Vec::with_capacity(expected.last().map_or(0, |l| l.end()));
    for (i, (shape, rec)) in expected.iter().zip(file.layers).enumerate() {
        if shape.fan_in != rec.fan_in
            || shape.fan_out != rec.fan_out
            || rec.weights.len() != shape.fan_in * shape.fan_out
            || rec.bias.len() != shape.fan_out
        {
            return Err(Error::Checkpoint(format!(
                "layer {i}: expected {}x{} for n_nodes = {}, found {}x{} with {} weights and {} biases",
                shape.fan_out,
                shape.fan_in,
                file.config.n_nodes,
                rec.fan_out,
                rec.fan_in,
                rec.weights.len(),
                rec.bias.len()
            )));
        }
        params.extend(rec.weights);
        params.extend(rec.bias);
    }
    let denoiser = Denoiser::from_parts(file.config, params)?;
    file.optimizer.check_consistent()?;
    if file.optimizer.len() != denoiser.param_count() {
        return Err(Error::Checkpoint(format!(
            "optimizer tracks {} parameters, model has {}",
            file.optimizer.len(),
            denoiser.param_count()
        )));
    }
    Ok((denoiser, file.optimizer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_schedule, KernelTables};
    use crate::model::{AdamConfig, X0Predictor};
    use crate::rng::rng_from_seed;

    fn trained() -> (Denoiser, OptimizerState) {
        let mut d = Denoiser::new(DenoiserConfig { n_nodes: 5, hidden_sizes: vec![7], time_embed_dim: 4, seed: 2 }).unwrap();
        let mut opt = OptimizerState::new(d.param_count(), AdamConfig::default());
        let tables = KernelTables::new(&build_schedule(0.4, 0.5, 10, 0.8).unwrap());
        let g: Vec<bool> = (0..10).map(|i| i % 4 == 1).collect();
        let mut rng = rng_from_seed(9);
        for _ in 0..3 {
            d.train_step(&mut opt, &[&g], &tables, &mut rng).unwrap();
        }
        (d, opt)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (d, opt) = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&d, &opt, &path).unwrap();
        let (d2, opt2) = load_checkpoint(&path).unwrap();
        assert_eq!(d, d2);
        assert_eq!(opt, opt2);
        let probe: Vec<f64> = (0..10).map(|i| (i % 3 == 0) as u8 as f64).collect();
        assert_eq!(d.predict_x0(&probe, 4, 10).unwrap(), d2.predict_x0(&probe, 4, 10).unwrap());
    }

    #[test]
    fn truncated_file_fails() {
        let (d, opt) = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&d, &opt, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn node_count_mismatch_is_a_shape_error() {
        let (d, opt) = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&d, &opt, &path).unwrap();
        let mut json: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        json["config"]["n_nodes"] = 6.into();
        std::fs::write(&path, serde_json::to_vec(&json).unwrap()).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("n_nodes = 6"), "{err}");
    }

    #[test]
    fn wrong_version_fails() {
        let (d, opt) = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&d, &opt, &path).unwrap();
        let mut json: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        json["version"] = 99.into();
        std::fs::write(&path, serde_json::to_vec(&json).unwrap()).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Checkpoint(_))));
    }
}
