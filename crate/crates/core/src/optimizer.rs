//! AdamW with decoupled weight decay, plus the learning-rate and
//! regularization schedules used during training.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScwfError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWHyper {
    fn default() -> Self {
        AdamWHyper { beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamWState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub hyper: AdamWHyper,
}

impl AdamWState {
    pub fn new(len: usize, hyper: AdamWHyper) -> Self {
        AdamWState { step: 0, m: vec![0.0; len], v: vec![0.0; len], hyper }
    }

    /// One AdamW update of `theta` in place.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if theta.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(ScwfError::domain(format!(
                "optimizer holds {} moments, got theta {} and gradient {}",
                self.m.len(),
                theta.len(),
                grad.len()
            )));
        }
        let AdamWHyper { beta1, beta2, eps, weight_decay } = self.hyper;
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - beta1.powi(t);
        let bias2 = 1.0 - beta2.powi(t);
        for (((p, &g), m), v) in theta.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            let decay = lr * weight_decay * *p;
            *p -= lr * m_hat / (v_hat.sqrt() + eps) + decay;
        }
        Ok(())
    }
}

/// Pure form of [`AdamWState::step`].
pub fn adamw_step(state: &AdamWState, theta: &[f64], grad: &[f64], lr: f64) -> Result<(AdamWState, Vec<f64>)> {
    let mut next = state.clone();
    let mut theta = theta.to_vec();
    next.step(&mut theta, grad, lr)?;
    Ok((next, theta))
}

/// How the learning rate moves from `lr_start` to `lr_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LrDecay {
    #[default]
    Linear,
    Exponential,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub lr_start: f64,
    pub lr_end: f64,
    pub total_iters: usize,
    pub eps_start: f64,
    pub eps_decay_factor: f64,
    pub eps_every: usize,
    pub lr_decay: LrDecay,
}

impl Schedule {
    pub fn new(total_iters: usize) -> Self {
        Schedule {
            lr_start: 0.03,
            lr_end: 0.015,
            total_iters,
            eps_start: 1.0,
            eps_decay_factor: 0.7,
            eps_every: 1000,
            lr_decay: LrDecay::Linear,
        }
    }

    pub fn lr_at(&self, t: usize) -> Result<f64> {
        if t > self.total_iters {
            return Err(ScwfError::domain(format!("iteration {t} beyond schedule end {}", self.total_iters)));
        }
        let frac = if self.total_iters == 0 { 0.0 } else { t as f64 / self.total_iters as f64 };
        Ok(match self.lr_decay {
            LrDecay::Linear => self.lr_start + (self.lr_end - self.lr_start) * frac,
            LrDecay::Exponential => self.lr_start * (self.lr_end / self.lr_start).powf(frac),
            LrDecay::Constant => self.lr_start,
        })
    }

    /// Regularization weight: `eps_start · factor^⌊t / eps_every⌋`, no floor.
    pub fn eps_at(&self, t: usize) -> f64 {
        let drops = (t / self.eps_every.max(1)) as i32;
        self.eps_start * self.eps_decay_factor.powi(drops)
    }
}
