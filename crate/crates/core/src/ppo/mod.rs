//! Proximal policy optimization with a clipped surrogate objective,
//! generalized advantage estimation and Adam, on hand-written networks.

mod adam;
mod agent;
mod buffer;
mod checkpoint;
mod gae;
mod mlp;
mod objective;
pub mod policy;
mod scaling;
mod train;

use serde::{Deserialize, Serialize};

pub use adam::{clip_grad_norm, Adam};
pub use agent::{ActorCritic, Workspace};
pub use buffer::RolloutBuffer;
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use gae::compute_gae;
pub use mlp::{MlpCache, MlpShape};
pub use objective::{clipped_surrogate, ppo_objective, Batch, LossCoefficients, LossTerms};
pub use scaling::RewardScaler;
pub use train::{PpoController, Trainer, UpdateMetrics, METRICS_HEADER};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub learning_rate: f64,
    /// Discount factor.
    pub gamma: f64,
    pub clip_eps: f64,
    pub gae_lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    /// Agent transitions collected per update. Episodes are always run to
    /// completion, so a rollout can overshoot this.
    pub rollout_horizon: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub total_episodes: usize,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
    pub normalize_advantages: bool,
    /// Divide training rewards by the running std of the discounted return.
    pub scale_rewards: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            learning_rate: 5e-5,
            gamma: 0.99,
            clip_eps: 0.2,
            gae_lambda: 0.95,
            epochs: 10,
            minibatch_size: 256,
            rollout_horizon: 4096,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            total_episodes: 6000,
            seed: 0,
            hidden: vec![256, 128],
            init_log_std: 0.5f64.ln(),
            normalize_advantages: true,
            scale_rewards: true,
        }
    }
}

impl PpoConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PpoConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail(format!("ppo.learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail(format!("ppo.gamma must be in (0, 1], got {}", self.gamma));
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return fail(format!("ppo.gae_lambda must be in (0, 1], got {}", self.gae_lambda));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return fail(format!("ppo.clip_eps must be in (0, 1), got {}", self.clip_eps));
        }
        if self.epochs == 0 {
            return fail("ppo.epochs must be >= 1".into());
        }
        if self.minibatch_size == 0 || self.rollout_horizon == 0 {
            return fail("ppo.minibatch_size and ppo.rollout_horizon must be >= 1".into());
        }
        for (name, v) in [("entropy_coef", self.entropy_coef), ("value_coef", self.value_coef), ("max_grad_norm", self.max_grad_norm)] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("ppo.{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return fail(format!("ppo.hidden must list positive widths, got {:?}", self.hidden));
        }
        if !(policy::LOG_STD_MIN..=policy::LOG_STD_MAX).contains(&self.init_log_std) {
            return fail(format!("ppo.init_log_std must be in [-5, 2], got {}", self.init_log_std));
        }
        Ok(())
    }

    pub fn loss_coefficients(&self) -> LossCoefficients {
        LossCoefficients { clip_eps: self.clip_eps, entropy_coef: self.entropy_coef, value_coef: self.value_coef }
    }
}
