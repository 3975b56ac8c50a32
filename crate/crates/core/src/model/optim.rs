use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_lr() -> f64 {
    1e-3
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: default_lr(), beta1: default_beta1(), beta2: default_beta2(), epsilon: default_eps() }
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub config: AdamConfig,
    step: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl OptimizerState {
    pub fn new(param_count: usize, config: AdamConfig) -> Self {
        Self { config, step: 0, first_moment: vec![0.0; param_count], second_moment: vec![0.0; param_count] }
    }

    pub fn step_count(&self) -> usize {
        self.step as usize
    }

    pub fn len(&self) -> usize {
        self.first_moment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_moment.is_empty()
    }

    pub(crate) fn check_consistent(&self) -> Result<()> {
        if self.first_moment.len() != self.second_moment.len() {
            return Err(Error::ShapeMismatch { expected: self.first_moment.len(), got: self.second_moment.len() });
        }
        Ok(())
    }

    pub fn update(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.len() || grad.len() != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got: params.len().min(grad.len()) });
        }
        self.step += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = self.config;
        let bias1 = 1.0 - beta1.powi(self.step as i32);
        let bias2 = 1.0 - beta2.powi(self.step as i32);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        // after one step m_hat = g and v_hat = g^2, so the update is lr * g / (|g| + eps)
        let mut opt = OptimizerState::new(2, AdamConfig::default());
        let mut p = vec![1.0, -1.0];
        opt.update(&mut p, &[0.5, -2.0]).unwrap();
        assert!((p[0] - (1.0 - 1e-3 * 0.5 / (0.5 + 1e-8))).abs() < 1e-15);
        assert!((p[1] - (-1.0 + 1e-3 * 2.0 / (2.0 + 1e-8))).abs() < 1e-15);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut opt = OptimizerState::new(1, AdamConfig { learning_rate: 0.05, ..AdamConfig::default() });
        let mut x = vec![3.0];
        for _ in 0..2000 {
            let g = [2.0 * (x[0] - 1.0)];
            opt.update(&mut x, &g).unwrap();
        }
        assert!((x[0] - 1.0).abs() < 1e-3, "{}", x[0]);
    }

    #[test]
    fn shape_mismatch() {
        let mut opt = OptimizerState::new(2, AdamConfig::default());
        assert!(opt.update(&mut [0.0; 3], &[0.0; 3]).is_err());
    }
}
