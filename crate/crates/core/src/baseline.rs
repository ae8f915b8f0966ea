//! Scripted comparison controllers.
//!
//! `neutral` holds every surface at zero. `pare` is the manual spin-recovery
//! sequence: throttle to idle, ailerons neutral, rudder against the yaw rate
//! and elevator forward (nose down).

use serde::{Deserialize, Serialize};

use crate::dynamics::{AircraftState, ControlInput, ControlLimits};
use crate::env::{Action, EnvConfig, Observation};
use crate::error::{Error, Result};
use crate::eval::Controller;
use crate::reward::Targets;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaselineConfig {
    Neutral,
    Pare {
        /// Elevator deflection held throughout, rad (<= 0).
        #[serde(default = "default_elevator")]
        elevator: f64,
        /// Rudder magnitude, rad, applied against the sign of r.
        #[serde(default = "default_rudder")]
        rudder: f64,
        /// |r| below which the rudder is centred, rad/s.
        #[serde(default = "default_deadband")]
        yaw_deadband: f64,
        #[serde(default)]
        idle_throttle: f64,
    },
}

fn default_elevator() -> f64 {
    -0.3
}
fn default_rudder() -> f64 {
    0.45
}
fn default_deadband() -> f64 {
    0.05
}

impl BaselineConfig {
    pub fn pare() -> Self {
        BaselineConfig::Pare {
            elevator: default_elevator(),
            rudder: default_rudder(),
            yaw_deadband: default_deadband(),
            idle_throttle: 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaselineConfig::Neutral => "neutral",
            BaselineConfig::Pare { .. } => "pare",
        }
    }

    pub fn validate(&self, limits: &ControlLimits) -> Result<()> {
        if let BaselineConfig::Pare { elevator, rudder, yaw_deadband, idle_throttle } = *self {
            if !(elevator <= 0.0 && limits.elevator.contains(elevator)) {
                return Err(Error::config(format!("pare.elevator must be <= 0 and within limits, got {elevator}")));
            }
            if !(rudder >= 0.0 && limits.rudder.contains(rudder) && limits.rudder.contains(-rudder)) {
                return Err(Error::config(format!("pare.rudder must be >= 0 and within limits, got {rudder}")));
            }
            if !(yaw_deadband.is_finite() && yaw_deadband >= 0.0) {
                return Err(Error::config(format!("pare.yaw_deadband must be >= 0, got {yaw_deadband}")));
            }
            if !(0.0..=1.0).contains(&idle_throttle) {
                return Err(Error::config(format!("pare.idle_throttle must be in [0, 1], got {idle_throttle}")));
            }
        }
        Ok(())
    }

    /// Scenario as flown by this controller: PARE sets the throttle to idle.
    pub fn scenario(&self, env: &EnvConfig) -> EnvConfig {
        let mut env = env.clone();
        if let BaselineConfig::Pare { idle_throttle, .. } = *self {
            env.eta = idle_throttle;
        }
        env
    }

    /// Surface deflections for the current state.
    pub fn command(&self, x: &AircraftState) -> ControlInput {
        match *self {
            BaselineConfig::Neutral => ControlInput::default(),
            BaselineConfig::Pare { elevator, rudder, yaw_deadband, .. } => {
                let delta_r = if x.r.abs() <= yaw_deadband { 0.0 } else { -rudder * x.r.signum() };
                ControlInput { delta_e: elevator, delta_a: 0.0, delta_r, eta: 0.0 }
            }
        }
    }
}

/// Inverse of the environment's action scaling: the raw action that maps to `u`.
pub fn unscale_action(u: &ControlInput, limits: &ControlLimits) -> Action {
    let inv = |v: f64, lo: f64, hi: f64| 2.0 * (v - lo) / (hi - lo) - 1.0;
    [
        inv(u.delta_e, limits.elevator.min, limits.elevator.max),
        inv(u.delta_a, limits.aileron.min, limits.aileron.max),
        inv(u.delta_r, limits.rudder.min, limits.rudder.max),
    ]
}

pub struct BaselineController {
    config: BaselineConfig,
    limits: ControlLimits,
}

impl BaselineController {
    pub fn new(config: BaselineConfig, limits: ControlLimits) -> Result<Self> {
        config.validate(&limits)?;
        Ok(BaselineController { config, limits })
    }
}

impl Controller for BaselineController {
    fn act(&mut self, _obs: &Observation, state: &AircraftState, _targets: &Targets) -> Result<Action> {
        Ok(unscale_action(&self.config.command(state), &self.limits))
    }
}
