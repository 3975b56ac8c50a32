//! Asymmetric Bernoulli diffusion kernel.
//!
//! Each edge bit is noised independently by a two-state Markov chain. At step
//! `t` a 0-bit flips to 1 with probability `beta0[t]` and a 1-bit flips to 0
//! with probability `beta1[t]`. When both schedules settle on constant limits
//! `p0` and `p1`, the chain forgets its start and converges to
//! `Bernoulli(p0 / (p0 + p1))`, so the kernel induces an Erdős–Rényi prior
//! with any edge probability in `[0, 1]`.
//!
//! Steps are 1-based throughout: `t = 1..=T` indexes transitions and `t = 0`
//! denotes clean data.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this many steps, tables are filled with the linear-time recursion
/// instead of the quadratic closed form.
const CLOSED_FORM_MAX_STEPS: usize = 10_000;

/// Per-step flip probabilities for both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    beta0: Vec<f64>,
    beta1: Vec<f64>,
}

impl NoiseSchedule {
    /// Builds a schedule from explicit per-step sequences, `beta0[0]` being the
    /// flip-to-1 probability of step 1.
    ///
    /// The limits `p0`, `p1` are taken to be the final entries. An all-zero
    /// schedule is accepted here (it is a valid chain that never moves), but
    /// [`NoiseSchedule::prior_prob`] will reject it.
    pub fn new(beta0: Vec<f64>, beta1: Vec<f64>) -> Result<Self> {
        if beta0.is_empty() {
            return Err(Error::invalid("beta0", "schedule needs at least one step"));
        }
        if beta0.len() != beta1.len() {
            return Err(Error::invalid(
                "beta1",
                format!("length {} differs from beta0 length {}", beta1.len(), beta0.len()),
            ));
        }
        for (name, seq) in [("beta0", &beta0), ("beta1", &beta1)] {
            if let Some((i, b)) = seq.iter().enumerate().find(|(_, b)| !(0.0..=0.5).contains(*b)) {
                return Err(Error::invalid(name, format!("step {} has {b}, outside [0, 0.5]", i + 1)));
            }
        }
        Ok(Self { beta0, beta1 })
    }

    /// Constant schedule `beta0 = p0`, `beta1 = p1` at every step.
    pub fn constant(p0: f64, p1: f64, steps: usize) -> Result<Self> {
        Self::new(vec![p0; steps], vec![p1; steps])
    }

    /// Linear ramp to the plateau `(p0, p1)`: `beta_t = p * min(1, t / (ramp_frac * T))`.
    pub fn ramp(p0: f64, p1: f64, steps: usize, ramp_frac: f64) -> Result<Self> {
        if !(ramp_frac > 0.0 && ramp_frac <= 1.0) {
            return Err(Error::invalid("ramp_frac", format!("{ramp_frac} outside (0, 1]")));
        }
        let ramp_len = ramp_frac * steps as f64;
        let shape: Vec<f64> = (1..=steps).map(|t| (t as f64 / ramp_len).min(1.0)).collect();
        Self::new(
            shape.iter().map(|s| p0 * s).collect(),
            shape.iter().map(|s| p1 * s).collect(),
        )
    }

    /// Number of diffusion steps `T`.
    pub fn steps(&self) -> usize {
        self.beta0.len()
    }

    /// Flip-to-1 probability of step `t` (1-based).
    pub fn beta0(&self, t: usize) -> f64 {
        self.beta0[t - 1]
    }

    /// Flip-to-0 probability of step `t` (1-based).
    pub fn beta1(&self, t: usize) -> f64 {
        self.beta1[t - 1]
    }

    pub fn p0(&self) -> f64 {
        self.beta0[self.beta0.len() - 1]
    }

    pub fn p1(&self) -> f64 {
        self.beta1[self.beta1.len() - 1]
    }

    /// Edge probability of the limiting distribution, `p0 / (p0 + p1)`.
    pub fn prior_prob(&self) -> Result<f64> {
        let (p0, p1) = (self.p0(), self.p1());
        if p0 + p1 <= 0.0 {
            return Err(Error::DegenerateSchedule);
        }
        Ok(p0 / (p0 + p1))
    }

    fn check_step(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps() {
            return Err(Error::StepOutOfRange { t, max: self.steps() });
        }
        Ok(())
    }

    /// Half of the mixing factor, `1 - beta0[t] - beta1[t]`.
    fn retention(&self, t: usize) -> f64 {
        1.0 - self.beta0(t) - self.beta1(t)
    }

    /// `q(x_t = 1 | x_0)` from the alternating closed form.
    ///
    /// Evaluates
    /// `[t odd] + sum_i (-1)^i / 2 * eps_i * prod_{j>i} ebar_j / 2 + x0 * prod_j ebar_j / 2`
    /// where `eps_i = 2(1 - beta0_i)` for odd `i`, `2(1 - beta1_i)` for even `i`,
    /// and `ebar_j / 2 = 1 - beta0_j - beta1_j`. Every product stays in `[0, 1]`,
    /// so no term overflows however long the chain. Cost is `O(t)`.
    pub fn forward_prob(&self, t: usize, x0: bool) -> Result<f64> {
        self.check_step(t)?;
        Ok(self.forward_closed_form(t, x0))
    }

    fn forward_closed_form(&self, t: usize, x0: bool) -> f64 {
        let mut sum = 0.0;
        let mut suffix = 1.0;
        for i in (1..=t).rev() {
            let term = if i % 2 == 1 {
                -(1.0 - self.beta0(i))
            } else {
                1.0 - self.beta1(i)
            };
            sum += term * suffix;
            suffix *= self.retention(i);
        }
        let parity = if t % 2 == 1 { 1.0 } else { 0.0 };
        parity + sum + if x0 { suffix } else { 0.0 }
    }

    /// `q(x_t = 1 | x_0)` by propagating the one-step chain
    /// `q_t = q_{t-1} (1 - beta1_t) + (1 - q_{t-1}) beta0_t`.
    ///
    /// Independent of [`NoiseSchedule::forward_prob`]; used as its oracle and
    /// for very long schedules.
    pub fn forward_prob_recursive(&self, t: usize, x0: bool) -> Result<f64> {
        self.check_step(t)?;
        let mut q = if x0 { 1.0 } else { 0.0 };
        for s in 1..=t {
            q = q * (1.0 - self.beta1(s)) + (1.0 - q) * self.beta0(s);
        }
        Ok(q)
    }
}

/// Target prior and mixing strength for [`build_schedule`].
///
/// Places the plateau at `(p0, p1) = (c * prior_p, c * (1 - prior_p))`, which
/// hits `prior_p` exactly for any `c`. `c = 0.5` is the largest value keeping
/// both flip probabilities within `[0, 0.5]`.
pub fn build_schedule(prior_p: f64, scale_c: f64, steps: usize, ramp_frac: f64) -> Result<NoiseSchedule> {
    if steps < 2 {
        return Err(Error::invalid("T", format!("{steps} steps, need at least 2")));
    }
    if !(0.0..=1.0).contains(&prior_p) {
        return Err(Error::invalid("prior_p", format!("{prior_p} outside [0, 1]")));
    }
    if !(scale_c > 0.0 && scale_c <= 0.5) {
        return Err(Error::invalid("scale_c", format!("{scale_c} outside (0, 0.5]")));
    }
    NoiseSchedule::ramp(scale_c * prior_p, scale_c * (1.0 - prior_p), steps, ramp_frac)
}

/// Forward marginals precomputed for every step of a schedule.
#[derive(Debug, Clone)]
pub struct KernelTables {
    schedule: NoiseSchedule,
    q_from0: Vec<f64>,
    q_from1: Vec<f64>,
    signal: Vec<f64>,
}

impl KernelTables {
    pub fn new(schedule: &NoiseSchedule) -> Self {
        let steps = schedule.steps();
        let mut q_from0 = Vec::with_capacity(steps + 1);
        let mut q_from1 = Vec::with_capacity(steps + 1);
        let mut signal = Vec::with_capacity(steps + 1);
        q_from0.push(0.0);
        q_from1.push(1.0);
        signal.push(1.0);

        if steps <= CLOSED_FORM_MAX_STEPS {
            for t in 1..=steps {
                q_from0.push(schedule.forward_closed_form(t, false));
                q_from1.push(schedule.forward_closed_form(t, true));
            }
        } else {
            let (mut a, mut b) = (0.0, 1.0);
            for t in 1..=steps {
                a = a * (1.0 - schedule.beta1(t)) + (1.0 - a) * schedule.beta0(t);
                b = b * (1.0 - schedule.beta1(t)) + (1.0 - b) * schedule.beta0(t);
                q_from0.push(a);
                q_from1.push(b);
            }
        }
        for t in 1..=steps {
            let prev = signal[t - 1];
            signal.push(prev * schedule.retention(t));
        }

        Self { schedule: schedule.clone(), q_from0, q_from1, signal }
    }

    pub fn schedule(&self) -> &NoiseSchedule {
        &self.schedule
    }

    pub fn steps(&self) -> usize {
        self.schedule.steps()
    }

    pub fn q_from0(&self) -> &[f64] {
        &self.q_from0
    }

    pub fn q_from1(&self) -> &[f64] {
        &self.q_from1
    }

    /// `q(x_t = 1 | x_0)` for `t = 0..=T`.
    pub fn marginal(&self, t: usize, x0: bool) -> f64 {
        if x0 {
            self.q_from1[t]
        } else {
            self.q_from0[t]
        }
    }

    /// Product `prod_{j <= t} (1 - beta0_j - beta1_j)`: the weight the clean bit
    /// still carries in the step-`t` marginal. `t = 0` gives 1.
    pub fn signal_remaining(&self, t: usize) -> Result<f64> {
        self.signal
            .get(t)
            .copied()
            .ok_or(Error::StepOutOfRange { t, max: self.steps() })
    }

    /// `P(x_{t-1} = 1 | x_t, x_0)` by Bayes' rule over the one-step transition.
    pub fn posterior_prob(&self, t: usize, xt: bool, x0: bool) -> Result<f64> {
        self.schedule.check_step(t)?;
        // P(x_t | x_{t-1} = 1) and P(x_t | x_{t-1} = 0).
        let (b0, b1) = (self.schedule.beta0(t), self.schedule.beta1(t));
        let from_one = if xt { 1.0 - b1 } else { b1 };
        let from_zero = if xt { b0 } else { 1.0 - b0 };
        let prev = self.marginal(t - 1, x0);
        // The evidence P(x_t | x_0) is expanded over x_{t-1} rather than read
        // from the table: the two agree analytically, but dividing the
        // numerator by its own expansion keeps the posterior normalized to
        // rounding even when the evidence is tiny.
        let numerator = from_one * prev;
        let evidence = numerator + from_zero * (1.0 - prev);
        if evidence <= 0.0 {
            return Err(Error::ImpossibleConditioning { t, xt: xt as u8, x0: x0 as u8 });
        }
        if t == 1 {
            // x_0 is observed.
            return Ok(if x0 { 1.0 } else { 0.0 });
        }
        Ok(numerator / evidence)
    }

    /// Draws `x_t ~ q(. | x_0)` independently for every bit.
    pub fn sample_forward<R: rand::Rng + ?Sized>(&self, x0: &[bool], t: usize, rng: &mut R) -> Result<Vec<bool>> {
        self.schedule.check_step(t)?;
        let (p_from0, p_from1) = (self.q_from0[t], self.q_from1[t]);
        Ok(x0
            .iter()
            .map(|&bit| rng.random::<f64>() < if bit { p_from1 } else { p_from0 })
            .collect())
    }

    /// Writes `t,beta0,beta1,q_from0,q_from1,signal` rows for `t = 0..=T`.
    /// The `t = 0` row has zero flip probabilities.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,beta0,beta1,q_from0,q_from1,signal")?;
        for t in 0..=self.steps() {
            let (b0, b1) = if t == 0 {
                (0.0, 0.0)
            } else {
                (self.schedule.beta0(t), self.schedule.beta1(t))
            };
            writeln!(
                out,
                "{t},{b0},{b1},{},{},{}",
                self.q_from0[t], self.q_from1[t], self.signal[t]
            )?;
        }
        Ok(())
    }
}
