use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{clip_grad_norm, Adam};
use super::agent::{ActorCritic, Workspace};
use super::buffer::RolloutBuffer;
use super::checkpoint::Checkpoint;
use super::objective::{ppo_objective, Batch, LossTerms};
use super::scaling::RewardScaler;
use super::{policy, PpoConfig};
use crate::dynamics::AircraftState;
use crate::env::{Action, Observation, SpinEnv, ACT_DIM, OBS_DIM};
use crate::error::{Error, Result};
use crate::eval::Controller;
use crate::reward::Targets;

pub const METRICS_HEADER: &str = "update,episodes,steps,mean_return,actor_loss,value_loss,entropy,clip_frac,approx_kl";

/// One row of the training log. Counters are cumulative; losses are averaged
/// over every minibatch of the update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateMetrics {
    pub update: usize,
    pub episodes: usize,
    pub steps: u64,
    pub mean_return: f64,
    pub actor_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_frac: f64,
    pub approx_kl: f64,
}

pub struct Trainer {
    config: PpoConfig,
    agent: ActorCritic,
    optimizer: Adam,
    scaler: RewardScaler,
    rng: ChaCha8Rng,
    env: SpinEnv,
    buffer: RolloutBuffer,
    ws: Workspace,
    episodes: usize,
    steps: u64,
    updates: usize,
}

#[derive(Default)]
struct Minibatch {
    obs: Vec<f64>,
    actions: Vec<f64>,
    old: Vec<f64>,
    adv: Vec<f64>,
    ret: Vec<f64>,
}

impl Trainer {
    /// Fresh networks initialized from `config.seed`.
    pub fn new(env: SpinEnv, config: PpoConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut agent = ActorCritic::new(OBS_DIM, ACT_DIM, &config.hidden)?;
        agent.init(&mut rng, config.init_log_std)?;
        let optimizer = Adam::new(agent.num_params(), config.learning_rate);
        Ok(Trainer {
            buffer: RolloutBuffer::new(OBS_DIM, ACT_DIM),
            ws: Workspace::default(),
            episodes: 0,
            steps: 0,
            updates: 0,
            config,
            agent,
            optimizer,
            scaler: RewardScaler::default(),
            rng,
            env,
        })
    }

    /// Continue from a checkpoint. `total_episodes` may be raised to extend the run.
    pub fn resume(env: SpinEnv, ckpt: Checkpoint, total_episodes: Option<usize>) -> Result<Self> {
        ckpt.check_compatible()?;
        let mut config = ckpt.config;
        if let Some(n) = total_episodes {
            config.total_episodes = n;
        }
        config.validate()?;
        Ok(Trainer {
            buffer: RolloutBuffer::new(OBS_DIM, ACT_DIM),
            ws: Workspace::default(),
            episodes: ckpt.episodes,
            steps: ckpt.steps,
            updates: ckpt.updates,
            config,
            agent: ckpt.agent,
            optimizer: ckpt.optimizer,
            scaler: ckpt.reward_scaler,
            rng: ckpt.rng,
            env,
        })
    }

    pub fn config(&self) -> &PpoConfig {
        &self.config
    }

    pub fn agent(&self) -> &ActorCritic {
        &self.agent
    }

    pub fn env(&self) -> &SpinEnv {
        &self.env
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn is_done(&self) -> bool {
        self.episodes >= self.config.total_episodes
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            self.config.clone(),
            self.agent.clone(),
            self.optimizer.clone(),
            self.scaler.clone(),
            self.rng.clone(),
            self.episodes,
            self.steps,
            self.updates,
        )
    }

    /// Run updates until the episode budget is spent, calling `on_update`
    /// after each one.
    pub fn train<F>(&mut self, mut on_update: F) -> Result<Checkpoint>
    where
        F: FnMut(&UpdateMetrics, &Trainer) -> Result<()>,
    {
        while !self.is_done() {
            let m = self.update()?;
            on_update(&m, self)?;
        }
        Ok(self.checkpoint())
    }

    /// Collect whole episodes until the rollout horizon is reached (or the
    /// budget runs out), then optimize on them.
    pub fn update(&mut self) -> Result<UpdateMetrics> {
        let mut returns = Vec::new();
        while self.buffer.len() < self.config.rollout_horizon && !self.is_done() {
            let ret = self.collect_episode().map_err(|e| self.wrap(e))?;
            returns.push(ret);
            self.episodes += 1;
        }
        let terms = if self.buffer.is_empty() { LossTerms::default() } else { self.optimize().map_err(|e| self.wrap(e))? };
        self.buffer.clear();
        self.updates += 1;
        let mean_return = if returns.is_empty() { 0.0 } else { returns.iter().sum::<f64>() / returns.len() as f64 };
        Ok(UpdateMetrics {
            update: self.updates,
            episodes: self.episodes,
            steps: self.steps,
            mean_return,
            actor_loss: terms.policy_loss,
            value_loss: terms.value_loss,
            entropy: terms.entropy,
            clip_frac: terms.clip_frac,
            approx_kl: terms.approx_kl,
        })
    }

    fn wrap(&self, e: Error) -> Error {
        Error::Training { update: self.updates + 1, episode: self.episodes + 1, source: Box::new(e) }
    }

    /// Transitions flown under hold controls are not stored: the agent has no
    /// influence on them. They still count towards the episode return.
    fn collect_episode(&mut self) -> Result<f64> {
        let seed: u64 = self.rng.random();
        let mut obs = self.env.reset(seed);
        let mut total = 0.0;
        self.scaler.start_episode();
        loop {
            if self.env.in_hold() {
                let r = self.env.step(&[0.0; ACT_DIM])?;
                self.steps += 1;
                total += r.reward;
                if r.done() {
                    return Ok(total);
                }
                obs = r.observation;
                continue;
            }
            let (mean, ls) = self.agent.actor_forward(&obs, &mut self.ws)?;
            let (a, lp) = policy::sample(&mean, &ls, &mut self.rng);
            let value = self.agent.value(&obs, &mut self.ws)?;
            let r = self.env.step(&[a[0], a[1], a[2]])?;
            self.steps += 1;
            total += r.reward;
            let reward = if self.config.scale_rewards { self.scaler.scale(r.reward, self.config.gamma) } else { r.reward };
            self.buffer.push(&obs, &a, lp, value, reward, r.terminated)?;
            if r.done() {
                let boot = if r.truncated { self.agent.value(&r.observation, &mut self.ws)? } else { 0.0 };
                self.buffer.end_segment(boot);
                return Ok(total);
            }
            obs = r.observation;
        }
    }

    fn optimize(&mut self) -> Result<LossTerms> {
        let cfg = &self.config;
        self.buffer.finish(cfg.gamma, cfg.gae_lambda)?;
        if cfg.normalize_advantages {
            self.buffer.normalize_advantages();
        }
        let coefs = cfg.loss_coefficients();
        let n = self.buffer.len();
        let mut idx: Vec<usize> = (0..n).collect();
        let mut grad = vec![0.0; self.agent.num_params()];
        let mut mb = Minibatch::default();
        let mut acc = LossTerms::default();
        let mut count = 0usize;
        for _ in 0..cfg.epochs {
            idx.shuffle(&mut self.rng);
            for chunk in idx.chunks(cfg.minibatch_size) {
                gather(&self.buffer, chunk, &mut mb);
                let batch = Batch {
                    obs: &mb.obs,
                    actions: &mb.actions,
                    old_log_probs: &mb.old,
                    advantages: &mb.adv,
                    returns: &mb.ret,
                };
                let t = ppo_objective(&self.agent, &batch, &coefs, &mut self.ws, &mut grad)?;
                clip_grad_norm(&mut grad, cfg.max_grad_norm);
                self.optimizer.step(&mut self.agent.params, &grad)?;
                acc.loss += t.loss;
                acc.policy_loss += t.policy_loss;
                acc.value_loss += t.value_loss;
                acc.entropy += t.entropy;
                acc.clip_frac += t.clip_frac;
                acc.approx_kl += t.approx_kl;
                count += 1;
            }
        }
        let k = 1.0 / count.max(1) as f64;
        Ok(LossTerms {
            loss: acc.loss * k,
            policy_loss: acc.policy_loss * k,
            value_loss: acc.value_loss * k,
            entropy: acc.entropy * k,
            clip_frac: acc.clip_frac * k,
            approx_kl: acc.approx_kl * k,
        })
    }
}

fn gather(buf: &RolloutBuffer, idx: &[usize], mb: &mut Minibatch) {
    let (od, ad) = (buf.obs_dim(), buf.act_dim());
    mb.obs.clear();
    mb.actions.clear();
    mb.old.clear();
    mb.adv.clear();
    mb.ret.clear();
    for &i in idx {
        mb.obs.extend_from_slice(&buf.obs[i * od..(i + 1) * od]);
        mb.actions.extend_from_slice(&buf.actions[i * ad..(i + 1) * ad]);
        mb.old.push(buf.log_probs[i]);
        mb.adv.push(buf.advantages[i]);
        mb.ret.push(buf.returns[i]);
    }
}

/// Drives the environment with a trained actor: the mean action when
/// deterministic, a seeded Gaussian sample otherwise.
pub struct PpoController {
    agent: ActorCritic,
    deterministic: bool,
    rng: ChaCha8Rng,
    ws: Workspace,
}

impl PpoController {
    pub fn new(agent: ActorCritic, deterministic: bool, seed: u64) -> Result<Self> {
        agent.validate()?;
        if agent.obs_dim() != OBS_DIM || agent.act_dim() != ACT_DIM {
            return Err(Error::IncompatibleCheckpoint(format!(
                "policy maps {} -> {}, environment needs {OBS_DIM} -> {ACT_DIM}",
                agent.obs_dim(),
                agent.act_dim()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Ok(PpoController { agent, deterministic, rng, ws: Workspace::default() })
    }
}

impl Controller for PpoController {
    fn act(&mut self, obs: &Observation, _state: &AircraftState, _targets: &Targets) -> Result<Action> {
        let (mean, ls) = self.agent.actor_forward(obs, &mut self.ws)?;
        let a = if self.deterministic { mean } else { policy::sample(&mean, &ls, &mut self.rng).0 };
        Ok([a[0], a[1], a[2]])
    }
}
