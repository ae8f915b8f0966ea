//! Actor and critic networks plus the policy log-std, all in one flat parameter vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{MlpCache, MlpShape};
use super::policy::clamp_log_std;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCritic {
    pub actor: MlpShape,
    pub critic: MlpShape,
    /// `[actor | log_std | critic]`.
    pub params: Vec<f64>,
}

/// Reusable forward/backward buffers.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pub actor: MlpCache,
    pub critic: MlpCache,
}

impl ActorCritic {
    /// All-zero parameters.
    pub fn new(obs_dim: usize, act_dim: usize, hidden: &[usize]) -> Result<Self> {
        let actor = MlpShape::new(obs_dim, hidden, act_dim);
        let critic = MlpShape::new(obs_dim, hidden, 1);
        actor.validate()?;
        critic.validate()?;
        let n = actor.num_params() + act_dim + critic.num_params();
        Ok(ActorCritic { actor, critic, params: vec![0.0; n] })
    }

    /// Orthogonal init (hidden gain sqrt 2, actor output 0.01, critic output 1)
    /// and a uniform initial log-std.
    pub fn init<R: Rng + ?Sized>(&mut self, rng: &mut R, init_log_std: f64) -> Result<()> {
        let (na, nl) = (self.actor.num_params(), self.act_dim());
        let (a, rest) = self.params.split_at_mut(na);
        let (ls, c) = rest.split_at_mut(nl);
        let g = 2f64.sqrt();
        self.actor.init(a, rng, g, 0.01)?;
        ls.fill(init_log_std);
        self.critic.init(c, rng, g, 1.0)?;
        Ok(())
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.output()
    }

    pub fn validate(&self) -> Result<()> {
        self.actor.validate()?;
        self.critic.validate()?;
        if self.critic.input() != self.actor.input() || self.critic.output() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "critic {:?} incompatible with actor {:?}",
                self.critic.sizes, self.actor.sizes
            )));
        }
        let n = self.actor.num_params() + self.act_dim() + self.critic.num_params();
        if self.params.len() != n {
            return Err(Error::ShapeMismatch(format!("expected {n} parameters, got {}", self.params.len())));
        }
        if !self.params.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn ranges(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>, std::ops::Range<usize>) {
        let na = self.actor.num_params();
        let nl = self.act_dim();
        (0..na, na..na + nl, na + nl..self.params.len())
    }

    pub fn actor_params(&self) -> &[f64] {
        &self.params[self.ranges().0]
    }

    /// Raw (unclamped) log-std parameters.
    pub fn log_std_params(&self) -> &[f64] {
        &self.params[self.ranges().1]
    }

    pub fn critic_params(&self) -> &[f64] {
        &self.params[self.ranges().2]
    }

    /// Split a gradient vector with the same layout into its three parts.
    pub fn split_mut<'a>(&self, v: &'a mut [f64]) -> (&'a mut [f64], &'a mut [f64], &'a mut [f64]) {
        let (a, l, _) = self.ranges();
        let (head, critic) = v.split_at_mut(l.end);
        let (actor, ls) = head.split_at_mut(a.end);
        (actor, ls, critic)
    }

    /// Clamped log-std.
    pub fn log_std(&self) -> Vec<f64> {
        self.log_std_params().iter().map(|&v| clamp_log_std(v)).collect()
    }

    /// Action means for a batch of observations, left in `ws.actor.output()`.
    pub fn actor_forward_batch(&self, obs: &[f64], batch: usize, ws: &mut Workspace) -> Result<()> {
        self.actor.forward(self.actor_params(), obs, batch, &mut ws.actor)
    }

    /// Values for a batch of observations, left in `ws.critic.output()`.
    pub fn critic_forward_batch(&self, obs: &[f64], batch: usize, ws: &mut Workspace) -> Result<()> {
        self.critic.forward(self.critic_params(), obs, batch, &mut ws.critic)
    }

    /// `(mean, clamped log_std)` for one observation.
    pub fn actor_forward(&self, obs: &[f64], ws: &mut Workspace) -> Result<(Vec<f64>, Vec<f64>)> {
        self.actor_forward_batch(obs, 1, ws)?;
        Ok((ws.actor.output().to_vec(), self.log_std()))
    }

    pub fn value(&self, obs: &[f64], ws: &mut Workspace) -> Result<f64> {
        self.critic_forward_batch(obs, 1, ws)?;
        Ok(ws.critic.output()[0])
    }
}
