//! Episodic spin-recovery environment.
//!
//! `reset` places the aircraft in the developed spin. The first `spin_hold`
//! seconds are flown with fixed hold controls regardless of the action, after
//! which the agent's clipped and scaled action drives the surfaces. Each step
//! is one RK4 step; leaving the flight envelope (or a singular/non-finite
//! integration) terminates the episode with the terminal penalty.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aero::AeroModel;
use crate::dynamics::{
    euler_from_wind_angles, integrate_step, saturate, wrap_angle, AircraftParams, AircraftState, ControlInput,
    ControlLimits,
};
use crate::error::{Error, Result};
use crate::reward::{total_reward, Phase, RewardComponents, RewardWeights, Targets};

pub const OBS_DIM: usize = 11;
pub const ACT_DIM: usize = 3;

pub type Observation = [f64; OBS_DIM];
pub type Action = [f64; ACT_DIM];

const RATE_BOUND: f64 = 10.0 * PI;
const V_BOUNDS: (f64, f64) = (0.0, 2000.0);
const ALPHA_BOUNDS: (f64, f64) = (-0.244, 1.571);
const ANGLE_BOUNDS: (f64, f64) = (-PI, PI);
const RATE_BOUNDS: (f64, f64) = (-RATE_BOUND, RATE_BOUND);
const GAMMA_BOUNDS: (f64, f64) = (-1.745, 1.745);

/// Normalization range of each observation entry, in observation order
/// `[V, alpha, beta, p, q, r, mu, gamma, alpha_d, beta_d, mu_d]`.
pub const OBS_BOUNDS: [(f64, f64); OBS_DIM] = [
    V_BOUNDS,
    ALPHA_BOUNDS,
    ANGLE_BOUNDS,
    RATE_BOUNDS,
    RATE_BOUNDS,
    RATE_BOUNDS,
    ANGLE_BOUNDS,
    GAMMA_BOUNDS,
    ALPHA_BOUNDS,
    ANGLE_BOUNDS,
    ANGLE_BOUNDS,
];

/// Developed-spin initial condition. Euler angles are derived from the wind
/// angles at reset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub mu: f64,
    pub gamma: f64,
    #[serde(default)]
    pub chi: f64,
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition {
            v: 0.186 * 1116.0,
            alpha: 1.2375,
            beta: 0.0382,
            p: -0.6163,
            q: 0.1784,
            r: -1.4645,
            mu: -1.3508,
            gamma: -1.5075,
            chi: 0.0,
        }
    }
}

/// Surface deflections flown during the spin hold, rad.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoldControls {
    pub delta_e: f64,
    pub delta_a: f64,
    pub delta_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetMode {
    Fixed {
        #[serde(default = "default_alpha_target")]
        alpha: f64,
        #[serde(default)]
        beta: f64,
        #[serde(default)]
        mu: f64,
    },
    /// `alpha_d` drawn uniformly per episode, `beta_d = mu_d = 0`.
    Sampled {
        #[serde(default = "default_alpha_min")]
        alpha_min: f64,
        #[serde(default = "default_alpha_max")]
        alpha_max: f64,
    },
}

fn default_alpha_target() -> f64 {
    0.3
}
fn default_alpha_min() -> f64 {
    -0.0873
}
fn default_alpha_max() -> f64 {
    0.6981
}

impl Default for TargetMode {
    fn default() -> Self {
        TargetMode::Fixed { alpha: 0.3, beta: 0.0, mu: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub dt: f64,
    pub episode_len: usize,
    /// Seconds flown with `hold_controls` before the agent takes over.
    pub spin_hold: f64,
    pub hold_controls: HoldControls,
    pub initial_state: InitialCondition,
    pub target_mode: TargetMode,
    /// Constant throttle fraction.
    pub eta: f64,
    pub terminal_penalty: f64,
    pub start_altitude: f64,
    pub seed: u64,
    pub limits: ControlLimits,
    pub reward: RewardWeights,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            dt: 0.01,
            episode_len: 20_000,
            spin_hold: 30.0,
            hold_controls: HoldControls::default(),
            initial_state: InitialCondition::default(),
            target_mode: TargetMode::default(),
            eta: 0.2,
            terminal_penalty: -1000.0,
            start_altitude: 8500.0,
            seed: 0,
            limits: ControlLimits::default(),
            reward: RewardWeights::default(),
        }
    }
}

impl EnvConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EnvConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.episode_len == 0 {
            return Err(Error::config("episode_len must be > 0"));
        }
        if !(self.spin_hold.is_finite() && self.spin_hold >= 0.0) {
            return Err(Error::config(format!("spin_hold must be >= 0, got {}", self.spin_hold)));
        }
        if !(self.terminal_penalty.is_finite() && self.terminal_penalty <= 0.0) {
            return Err(Error::config(format!("terminal_penalty must be <= 0, got {}", self.terminal_penalty)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::config(format!("eta must be in [0, 1], got {}", self.eta)));
        }
        if !(self.start_altitude.is_finite() && self.start_altitude > 0.0) {
            return Err(Error::config(format!("start_altitude must be > 0, got {}", self.start_altitude)));
        }
        self.limits.validate()?;
        self.reward.validate()?;
        let s = &self.initial_state;
        if !(s.v > 0.0) || ![s.alpha, s.beta, s.p, s.q, s.r, s.mu, s.gamma, s.chi].iter().all(|v| v.is_finite()) {
            return Err(Error::config("initial_state must be finite with v > 0"));
        }
        if let TargetMode::Sampled { alpha_min, alpha_max } = self.target_mode {
            if !(alpha_min.is_finite() && alpha_max.is_finite() && alpha_min <= alpha_max) {
                return Err(Error::config(format!(
                    "target_mode.alpha_min ({alpha_min}) must not exceed alpha_max ({alpha_max})"
                )));
            }
        }
        Ok(())
    }

    /// Number of steps flown under hold controls.
    pub fn hold_steps(&self) -> usize {
        (self.spin_hold / self.dt).round() as usize
    }
}

/// Clip each entry to [-1, 1] and map it affinely onto its channel range.
/// Returns the saturated controls and the clipped action.
pub fn scale_action(a: &Action, limits: &ControlLimits, eta: f64) -> (ControlInput, Action) {
    let clipped = a.map(|v| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) });
    let map = |v: f64, lo: f64, hi: f64| lo + (v + 1.0) * 0.5 * (hi - lo);
    let u = ControlInput {
        delta_e: map(clipped[0], limits.elevator.min, limits.elevator.max),
        delta_a: map(clipped[1], limits.aileron.min, limits.aileron.max),
        delta_r: map(clipped[2], limits.rudder.min, limits.rudder.max),
        eta,
    };
    (saturate(u, limits), clipped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Airspeed,
    AngleOfAttack,
    Sideslip,
    Bank,
    Rate,
    FlightPath,
    Ground,
    NonFinite,
    /// Integration failed (singular kinematics or non-finite derivative).
    Integration(String),
}

/// `None` while the state is inside the flight envelope.
pub fn check_termination(x: &AircraftState) -> Option<TerminationReason> {
    use TerminationReason::*;
    if !x.is_finite() {
        return Some(NonFinite);
    }
    if !(V_BOUNDS.0..=V_BOUNDS.1).contains(&x.v) {
        return Some(Airspeed);
    }
    if !(ALPHA_BOUNDS.0..=ALPHA_BOUNDS.1).contains(&x.alpha) {
        return Some(AngleOfAttack);
    }
    if x.beta.abs() > PI {
        return Some(Sideslip);
    }
    if x.mu.abs() > PI {
        return Some(Bank);
    }
    if x.max_abs_rate() > RATE_BOUND {
        return Some(Rate);
    }
    if x.gamma.abs() > GAMMA_BOUNDS.1 {
        return Some(FlightPath);
    }
    if x.h <= 0.0 {
        return Some(Ground);
    }
    None
}

/// Map state and targets to [-1, 1] per [`OBS_BOUNDS`], clipping out-of-range values.
pub fn normalize_observation(x: &AircraftState, targets: &Targets) -> Observation {
    let raw = [x.v, x.alpha, x.beta, x.p, x.q, x.r, x.mu, x.gamma, targets.alpha, targets.beta, targets.mu];
    let mut out = [0.0; OBS_DIM];
    for i in 0..OBS_DIM {
        let (lo, hi) = OBS_BOUNDS[i];
        let v = 2.0 * (raw[i] - lo) / (hi - lo) - 1.0;
        out[i] = if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
    }
    out
}

/// Inverse of [`normalize_observation`] for in-range values:
/// `([V, alpha, beta, p, q, r, mu, gamma], targets)`.
pub fn denormalize_observation(obs: &Observation) -> ([f64; 8], Targets) {
    let mut raw = [0.0; OBS_DIM];
    for i in 0..OBS_DIM {
        let (lo, hi) = OBS_BOUNDS[i];
        raw[i] = lo + (obs[i] + 1.0) * 0.5 * (hi - lo);
    }
    let mut core = [0.0; 8];
    core.copy_from_slice(&raw[..8]);
    (core, Targets { alpha: raw[8], beta: raw[9], mu: raw[10] })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepInfo {
    pub phase: Phase,
    /// State after the step (the pre-step state if integration failed).
    pub state: AircraftState,
    pub applied: ControlInput,
    /// Clipped action entering the effort penalty; zeros during the hold.
    pub action: Action,
    pub components: RewardComponents,
    /// True when the step was flown under hold controls.
    pub hold: bool,
    pub termination: Option<TerminationReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub struct SpinEnv {
    config: EnvConfig,
    params: AircraftParams,
    aero: Arc<AeroModel>,
    state: AircraftState,
    targets: Targets,
    steps: usize,
    hold_steps: usize,
    finished: bool,
}

impl SpinEnv {
    /// The environment starts reset with `config.seed`.
    pub fn new(config: EnvConfig, params: AircraftParams, aero: Arc<AeroModel>) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        let hold_steps = config.hold_steps();
        let mut env = SpinEnv {
            params,
            aero,
            state: AircraftState::default(),
            targets: Targets::default(),
            steps: 0,
            hold_steps,
            finished: false,
            config,
        };
        env.reset(env.config.seed);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn params(&self) -> &AircraftParams {
        &self.params
    }

    pub fn aero(&self) -> &Arc<AeroModel> {
        &self.aero
    }

    pub fn state(&self) -> &AircraftState {
        &self.state
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Whether the next call to `step` is flown under hold controls.
    pub fn in_hold(&self) -> bool {
        self.steps < self.hold_steps
    }

    pub fn observation(&self) -> Observation {
        normalize_observation(&self.state, &self.targets)
    }

    pub fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.targets = match self.config.target_mode {
            TargetMode::Fixed { alpha, beta, mu } => Targets { alpha, beta, mu },
            TargetMode::Sampled { alpha_min, alpha_max } => {
                let alpha = if alpha_min < alpha_max { rng.random_range(alpha_min..=alpha_max) } else { alpha_min };
                Targets { alpha, beta: 0.0, mu: 0.0 }
            }
        };
        let s = self.config.initial_state;
        let (phi, theta, psi) = euler_from_wind_angles(s.alpha, s.beta, s.mu, s.gamma, s.chi);
        self.state = AircraftState {
            v: s.v,
            alpha: s.alpha,
            beta: s.beta,
            p: s.p,
            q: s.q,
            r: s.r,
            mu: s.mu,
            gamma: s.gamma,
            chi: s.chi,
            phi,
            theta,
            psi,
            h: self.config.start_altitude,
            t: 0.0,
        };
        self.steps = 0;
        self.finished = false;
        self.observation()
    }

    pub fn step(&mut self, action: &Action) -> Result<StepResult> {
        if self.finished {
            return Err(Error::EpisodeOver);
        }
        let hold = self.in_hold();
        let (applied, clipped) = if hold {
            let h = self.config.hold_controls;
            let u = ControlInput { delta_e: h.delta_e, delta_a: h.delta_a, delta_r: h.delta_r, eta: self.config.eta };
            (saturate(u, &self.config.limits), [0.0; ACT_DIM])
        } else {
            scale_action(action, &self.config.limits, self.config.eta)
        };

        let x_t = self.state;
        let next = integrate_step(&x_t, &applied, self.config.dt, &self.params, &self.aero).map(wrap_state);
        self.steps += 1;

        let (state, mut components, phase, termination) = match next {
            Ok(x_next) => {
                let (_, phase, c) = total_reward(&x_t, &x_next, &self.targets, &clipped, &self.config.reward);
                (x_next, c, phase, check_termination(&x_next))
            }
            Err(e @ (Error::Domain(_) | Error::Numerical(_))) => {
                let phase = crate::reward::phase_of(x_t.p, x_t.q, x_t.r, self.config.reward.rate_threshold);
                let mut stalled = x_t;
                stalled.t += self.config.dt;
                (stalled, RewardComponents::default(), phase, Some(TerminationReason::Integration(e.to_string())))
            }
            Err(e) => return Err(e),
        };

        let terminated = termination.is_some();
        if terminated {
            components.terminal = self.config.terminal_penalty;
        }
        let truncated = !terminated && self.steps >= self.config.episode_len;
        self.finished = terminated || truncated;
        self.state = state;

        Ok(StepResult {
            observation: self.observation(),
            reward: components.total(),
            terminated,
            truncated,
            info: StepInfo { phase, state, applied, action: clipped, components, hold, termination },
        })
    }
}

/// Keep the unbounded rotation angles in (-pi, pi]; the spin turns mu, chi,
/// phi and psi continuously.
fn wrap_state(mut x: AircraftState) -> AircraftState {
    x.mu = wrap_angle(x.mu);
    x.chi = wrap_angle(x.chi);
    x.phi = wrap_angle(x.phi);
    x.psi = wrap_angle(x.psi);
    x
}

/// One trajectory CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub mu: f64,
    pub gamma: f64,
    pub chi: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub h: f64,
    pub de: f64,
    pub da: f64,
    pub dr: f64,
    pub eta: f64,
    pub reward: f64,
    pub phase: u8,
}

impl TrajectoryRow {
    pub fn from_step(step: &StepResult) -> Self {
        let x = &step.info.state;
        let u = &step.info.applied;
        TrajectoryRow {
            t: x.t,
            v: x.v,
            alpha: x.alpha,
            beta: x.beta,
            p: x.p,
            q: x.q,
            r: x.r,
            mu: x.mu,
            gamma: x.gamma,
            chi: x.chi,
            phi: x.phi,
            theta: x.theta,
            psi: x.psi,
            h: x.h,
            de: u.delta_e,
            da: u.delta_a,
            dr: u.delta_r,
            eta: u.eta,
            reward: step.reward,
            phase: step.info.phase.index(),
        }
    }
}

pub fn write_trajectory_csv(path: impl AsRef<Path>, rows: &[TrajectoryRow]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<Vec<TrajectoryRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<TrajectoryRow>, _>>()?;
    Ok(rows)
}
