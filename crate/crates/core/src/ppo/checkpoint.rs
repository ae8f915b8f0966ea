use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::agent::ActorCritic;
use super::scaling::RewardScaler;
use super::PpoConfig;
use crate::env::{ACT_DIM, OBS_BOUNDS, OBS_DIM};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "spinrl-ppo-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to evaluate a policy or continue training bit-exactly.
/// Stored as JSON; floats round-trip exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub obs_dim: usize,
    pub act_dim: usize,
    /// Observation normalization ranges the policy was trained with.
    pub observation_bounds: Vec<[f64; 2]>,
    pub config: PpoConfig,
    pub agent: ActorCritic,
    pub optimizer: Adam,
    pub reward_scaler: RewardScaler,
    pub rng: ChaCha8Rng,
    pub episodes: usize,
    pub steps: u64,
    pub updates: usize,
}

fn current_bounds() -> Vec<[f64; 2]> {
    OBS_BOUNDS.iter().map(|&(lo, hi)| [lo, hi]).collect()
}

impl Checkpoint {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        config: PpoConfig,
        agent: ActorCritic,
        optimizer: Adam,
        reward_scaler: RewardScaler,
        rng: ChaCha8Rng,
        episodes: usize,
        steps: u64,
        updates: usize,
    ) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            obs_dim: OBS_DIM,
            act_dim: ACT_DIM,
            observation_bounds: current_bounds(),
            config,
            agent,
            optimizer,
            reward_scaler,
            rng,
            episodes,
            steps,
            updates,
        }
    }

    pub fn check_compatible(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::IncompatibleCheckpoint(msg));
        if self.format != CHECKPOINT_FORMAT {
            return bad(format!("unknown format {:?}", self.format));
        }
        if self.version != CHECKPOINT_VERSION {
            return bad(format!("version {} (this build reads {CHECKPOINT_VERSION})", self.version));
        }
        if self.obs_dim != OBS_DIM || self.act_dim != ACT_DIM {
            return bad(format!("dimensions {} -> {}, expected {OBS_DIM} -> {ACT_DIM}", self.obs_dim, self.act_dim));
        }
        if self.observation_bounds != current_bounds() {
            return bad("observation normalization differs from this build".into());
        }
        if self.agent.obs_dim() != OBS_DIM || self.agent.act_dim() != ACT_DIM {
            return bad("network dimensions do not match the header".into());
        }
        self.agent.validate().map_err(|e| Error::IncompatibleCheckpoint(e.to_string()))?;
        if self.optimizer.m.len() != self.agent.num_params() || self.optimizer.v.len() != self.agent.num_params() {
            return bad("optimizer state does not match the network".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let format = value.get("format").and_then(|v| v.as_str()).unwrap_or("");
        if format != CHECKPOINT_FORMAT {
            return Err(Error::IncompatibleCheckpoint(format!("unknown format {format:?}")));
        }
        let version = value.get("version").and_then(|v| v.as_u64());
        if version != Some(CHECKPOINT_VERSION as u64) {
            return Err(Error::IncompatibleCheckpoint(format!(
                "version {version:?} (this build reads {CHECKPOINT_VERSION})"
            )));
        }
        let ck: Checkpoint =
            serde_json::from_value(value).map_err(|e| Error::IncompatibleCheckpoint(e.to_string()))?;
        ck.check_compatible()?;
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
