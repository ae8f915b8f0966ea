use crate::error::{Error, Result};

use super::gae::compute_gae;

/// On-policy transition storage for one update cycle. Episodes are stored
/// back to back; each closed segment carries its own bootstrap value.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    obs_dim: usize,
    act_dim: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    /// `(start, end, bootstrap)` of each closed segment.
    segments: Vec<(usize, usize, f64)>,
    open_start: usize,
}

impl RolloutBuffer {
    pub fn new(obs_dim: usize, act_dim: usize) -> Self {
        RolloutBuffer { obs_dim, act_dim, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn push(&mut self, obs: &[f64], action: &[f64], log_prob: f64, value: f64, reward: f64, done: bool) -> Result<()> {
        if obs.len() != self.obs_dim {
            return Err(Error::LengthMismatch { what: "observation", expected: self.obs_dim, got: obs.len() });
        }
        if action.len() != self.act_dim {
            return Err(Error::LengthMismatch { what: "action", expected: self.act_dim, got: action.len() });
        }
        self.obs.extend_from_slice(obs);
        self.actions.extend_from_slice(action);
        self.log_probs.push(log_prob);
        self.values.push(value);
        self.rewards.push(reward);
        self.dones.push(done);
        Ok(())
    }

    /// Close the current segment. `bootstrap_value` is ignored when its last
    /// transition is terminal.
    pub fn end_segment(&mut self, bootstrap_value: f64) {
        let end = self.len();
        if end > self.open_start {
            self.segments.push((self.open_start, end, bootstrap_value));
        }
        self.open_start = end;
    }

    /// Compute advantages and returns for every closed segment. An open
    /// segment is an error.
    pub fn finish(&mut self, gamma: f64, lambda: f64) -> Result<()> {
        if self.open_start != self.len() {
            return Err(Error::Numerical("rollout buffer has an unterminated segment".into()));
        }
        self.advantages.clear();
        self.returns.clear();
        for &(s, e, boot) in &self.segments {
            let (a, r) = compute_gae(&self.rewards[s..e], &self.values[s..e], &self.dones[s..e], boot, gamma, lambda)?;
            self.advantages.extend(a);
            self.returns.extend(r);
        }
        if !self.advantages.iter().chain(&self.returns).all(|v| v.is_finite()) {
            return Err(Error::Numerical("non-finite advantage".into()));
        }
        Ok(())
    }

    /// Shift and scale advantages to zero mean and unit standard deviation.
    pub fn normalize_advantages(&mut self) {
        let n = self.advantages.len();
        if n == 0 {
            return;
        }
        let mean = self.advantages.iter().sum::<f64>() / n as f64;
        let var = self.advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt() + 1e-8;
        self.advantages.iter_mut().for_each(|a| *a = (*a - mean) / std);
    }

    pub fn clear(&mut self) {
        self.obs.clear();
        self.actions.clear();
        self.log_probs.clear();
        self.values.clear();
        self.rewards.clear();
        self.dones.clear();
        self.advantages.clear();
        self.returns.clear();
        self.segments.clear();
        self.open_start = 0;
    }
}
