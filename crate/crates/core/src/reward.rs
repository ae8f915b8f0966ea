//! Two-phase shaped reward.
//!
//! While any body rate is at or above the threshold the reward penalizes the
//! rate magnitude and cross-axis coupling. Once all rates are below it, the
//! reward tracks the angle-of-attack target, pays per-step bonuses for
//! holding alpha, beta and mu inside a narrow band, and charges for control
//! effort. A potential-based shaping term `G * sigma(s') - sigma(s)` is added
//! in both phases.

use serde::{Deserialize, Serialize};

use crate::dynamics::AircraftState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    /// Cross-coupling weight in the rate-damping phase.
    pub w_p1: f64,
    /// Alpha/pitch-rate cross term weight, also used in the shaping potential.
    pub w_p21: f64,
    /// Residual rate weight in the attitude phase.
    pub w_p22: f64,
    pub rate_threshold: f64,
    pub bonus_alpha: f64,
    pub bonus_beta: f64,
    pub bonus_mu: f64,
    pub bonus_band: f64,
    /// Discount applied to the next-state potential.
    pub shaping_gamma: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_p1: 0.3,
            w_p21: 0.3,
            w_p22: 0.05,
            rate_threshold: 0.17,
            bonus_alpha: 5.0,
            bonus_beta: 3.0,
            bonus_mu: 3.0,
            bonus_band: 0.017,
            shaping_gamma: 0.99,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("w_p1", self.w_p1),
            ("w_p21", self.w_p21),
            ("w_p22", self.w_p22),
            ("bonus_alpha", self.bonus_alpha),
            ("bonus_beta", self.bonus_beta),
            ("bonus_mu", self.bonus_mu),
            ("bonus_band", self.bonus_band),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("reward.{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.rate_threshold.is_finite() && self.rate_threshold > 0.0) {
            return Err(Error::Config(format!("reward.rate_threshold must be > 0, got {}", self.rate_threshold)));
        }
        if !(self.shaping_gamma > 0.0 && self.shaping_gamma <= 1.0) {
            return Err(Error::Config(format!("reward.shaping_gamma must be in (0, 1], got {}", self.shaping_gamma)));
        }
        Ok(())
    }

    /// Largest per-step value of the attitude-phase reward.
    pub fn max_phase2(&self) -> f64 {
        self.bonus_alpha + self.bonus_beta + self.bonus_mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    RateDamping,
    AttitudeTracking,
}

impl Phase {
    /// 1 for rate damping, 2 for attitude tracking.
    pub fn index(self) -> u8 {
        match self {
            Phase::RateDamping => 1,
            Phase::AttitudeTracking => 2,
        }
    }
}

/// Reference attitude, rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl Default for Targets {
    fn default() -> Self {
        Targets { alpha: 0.3, beta: 0.0, mu: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeErrors {
    pub e_alpha: f64,
    pub e_beta: f64,
    pub e_mu: f64,
}

impl AttitudeErrors {
    pub fn new(x: &AircraftState, targets: &Targets) -> Self {
        AttitudeErrors {
            e_alpha: x.alpha - targets.alpha,
            e_beta: x.beta - targets.beta,
            e_mu: x.mu - targets.mu,
        }
    }
}

/// Attitude tracking once every rate magnitude is strictly below `threshold`.
pub fn phase_of(p: f64, q: f64, r: f64, threshold: f64) -> Phase {
    if p.abs().max(q.abs()).max(r.abs()) < threshold {
        Phase::AttitudeTracking
    } else {
        Phase::RateDamping
    }
}

#[inline]
fn rate_norm_sq(p: f64, q: f64, r: f64) -> f64 {
    p * p + q * q + r * r
}

#[inline]
fn coupling(p: f64, q: f64, r: f64) -> f64 {
    (p * q).abs() + (q * r).abs() + (p * r).abs()
}

pub fn phase1_reward(p: f64, q: f64, r: f64, w: &RewardWeights) -> f64 {
    -rate_norm_sq(p, q, r) - w.w_p1 * coupling(p, q, r)
}

/// Attitude-phase reward. `action` holds the clipped, unscaled policy outputs.
pub fn phase2_reward(err: &AttitudeErrors, p: f64, q: f64, r: f64, action: &[f64; 3], w: &RewardWeights) -> f64 {
    let tracking = -err.e_alpha * err.e_alpha - w.w_p21 * err.e_alpha * q;
    let residual = -w.w_p22 * (rate_norm_sq(p, q, r) + coupling(p, q, r));
    let mut bonus = 0.0;
    if err.e_alpha.abs() < w.bonus_band {
        bonus += w.bonus_alpha;
    }
    if err.e_beta.abs() < w.bonus_band {
        bonus += w.bonus_beta;
    }
    if err.e_mu.abs() < w.bonus_band {
        bonus += w.bonus_mu;
    }
    let effort: f64 = action.iter().map(|a| a * a).sum();
    tracking + residual + bonus - effort
}

pub fn shaping_potential(e_alpha: f64, p: f64, q: f64, r: f64, w: &RewardWeights) -> f64 {
    -e_alpha * e_alpha - w.w_p21 * rate_norm_sq(p, q, r)
}

/// Per-step reward breakdown. `terminal` is filled in by the environment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardComponents {
    pub phase1: f64,
    pub phase2: f64,
    pub shaping: f64,
    pub terminal: f64,
}

impl RewardComponents {
    pub fn total(&self) -> f64 {
        self.phase1 + self.phase2 + self.shaping + self.terminal
    }
}

/// Shaped reward for the transition `x_t -> x_next`. The phase is decided on
/// `x_next`.
pub fn total_reward(
    x_t: &AircraftState,
    x_next: &AircraftState,
    targets: &Targets,
    action: &[f64; 3],
    w: &RewardWeights,
) -> (f64, Phase, RewardComponents) {
    let phase = phase_of(x_next.p, x_next.q, x_next.r, w.rate_threshold);
    let mut c = RewardComponents::default();
    match phase {
        Phase::RateDamping => c.phase1 = phase1_reward(x_next.p, x_next.q, x_next.r, w),
        Phase::AttitudeTracking => {
            let err = AttitudeErrors::new(x_next, targets);
            c.phase2 = phase2_reward(&err, x_next.p, x_next.q, x_next.r, action, w);
        }
    }
    let sigma_t = shaping_potential(x_t.alpha - targets.alpha, x_t.p, x_t.q, x_t.r, w);
    let sigma_next = shaping_potential(x_next.alpha - targets.alpha, x_next.p, x_next.q, x_next.r, w);
    c.shaping = w.shaping_gamma * sigma_next - sigma_t;
    (c.total(), phase, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w() -> RewardWeights {
        RewardWeights::default()
    }

    fn state(alpha: f64, beta: f64, mu: f64, p: f64, q: f64, r: f64) -> AircraftState {
        AircraftState { v: 300.0, alpha, beta, mu, p, q, r, h: 5000.0, ..Default::default() }
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_of(0.0, 0.0, 0.0, 0.17), Phase::AttitudeTracking);
        assert_eq!(phase_of(0.2, 0.0, 0.0, 0.17), Phase::RateDamping);
        assert_eq!(phase_of(0.16, 0.16, 0.16, 0.17), Phase::AttitudeTracking);
        assert_eq!(phase_of(0.0, -0.17, 0.0, 0.17), Phase::RateDamping);
    }

    #[test]
    fn phase1_examples() {
        assert_eq!(phase1_reward(1.0, 0.0, 0.0, &w()), -1.0);
        assert!((phase1_reward(1.0, 1.0, 0.0, &w()) - (-2.3)).abs() < 1e-15);
    }

    #[test]
    fn phase2_examples() {
        let zero = [0.0; 3];
        let err = AttitudeErrors { e_alpha: 0.1, e_beta: 0.0, e_mu: 0.0 };
        assert!((phase2_reward(&err, 0.0, 0.0, 0.0, &zero, &w()) - 5.99).abs() < 1e-12);

        let err = AttitudeErrors { e_alpha: 0.0, e_beta: 0.0, e_mu: 0.0 };
        assert_eq!(phase2_reward(&err, 0.0, 0.0, 0.0, &zero, &w()), 11.0);

        // Cross term alone: -w_p21 * e_alpha * q.
        let err = AttitudeErrors { e_alpha: 0.1, e_beta: 1.0, e_mu: 1.0 };
        let base = phase2_reward(&err, 0.0, 0.0, 0.0, &zero, &RewardWeights { w_p22: 0.0, ..w() });
        let with_q = phase2_reward(&err, 0.0, 0.1, 0.0, &zero, &RewardWeights { w_p22: 0.0, ..w() });
        assert!((with_q - base - (-0.003)).abs() < 1e-15);
    }

    #[test]
    fn action_penalty_uses_squared_entries() {
        let err = AttitudeErrors { e_alpha: 1.0, e_beta: 1.0, e_mu: 1.0 };
        let a = phase2_reward(&err, 0.0, 0.0, 0.0, &[0.0; 3], &w());
        let b = phase2_reward(&err, 0.0, 0.0, 0.0, &[1.0, -0.5, 0.5], &w());
        assert!((a - b - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bonus_band_edges_are_strict() {
        let zero = [0.0; 3];
        let inside = AttitudeErrors { e_alpha: 0.0169, e_beta: 1.0, e_mu: 1.0 };
        let edge = AttitudeErrors { e_alpha: 0.017, e_beta: 1.0, e_mu: 1.0 };
        let d = phase2_reward(&inside, 0.0, 0.0, 0.0, &zero, &w()) - phase2_reward(&edge, 0.0, 0.0, 0.0, &zero, &w());
        assert!((d - 5.0).abs() < 1e-3);
    }

    #[test]
    fn potential_examples() {
        assert_eq!(shaping_potential(0.0, 0.0, 0.0, 0.0, &w()), 0.0);
        assert_eq!(shaping_potential(1.0, 0.0, 0.0, 0.0, &w()), -1.0);
        assert!((shaping_potential(0.0, 1.0, 1.0, 1.0, &w()) - (-0.9)).abs() < 1e-15);
    }

    #[test]
    fn total_at_goal() {
        let x = state(0.3, 0.0, 0.0, 0.0, 0.0, 0.0);
        let (r, phase, c) = total_reward(&x, &x, &Targets::default(), &[0.0; 3], &w());
        assert_eq!(phase, Phase::AttitudeTracking);
        assert_eq!(r, 11.0);
        assert_eq!(c.shaping, 0.0);
    }

    #[test]
    fn shaping_from_unit_error_to_goal() {
        // sigma_t = -1, sigma_next = 0: shaping = 0.99 * 0 - (-1) = 1.
        let from = state(1.3, 0.0, 0.0, 0.0, 0.0, 0.0);
        let to = state(0.3, 0.0, 0.0, 0.0, 0.0, 0.0);
        let (_, _, c) = total_reward(&from, &to, &Targets::default(), &[0.0; 3], &w());
        assert!((c.shaping - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(RewardWeights { w_p1: -0.1, ..w() }.validate().is_err());
        assert!(RewardWeights { rate_threshold: 0.0, ..w() }.validate().is_err());
        assert!(RewardWeights { shaping_gamma: 1.5, ..w() }.validate().is_err());
        assert!(w().validate().is_ok());
    }

    #[test]
    fn weights_deserialize_with_defaults() {
        let parsed: RewardWeights = serde_json::from_str(r#"{"w_p1": 0.5}"#).unwrap();
        assert_eq!(parsed, RewardWeights { w_p1: 0.5, ..w() });
    }

    fn rates() -> impl Strategy<Value = (f64, f64, f64)> {
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
    }

    proptest! {
        #[test]
        fn phase1_symmetric_and_non_positive((p, q, r) in rates(), perm in 0usize..6, flips in 0u8..8) {
            let base = phase1_reward(p, q, r, &w());
            prop_assert!(base <= 0.0);
            let mut v = [p, q, r];
            for (i, x) in v.iter_mut().enumerate() {
                if flips & (1 << i) != 0 { *x = -*x; }
            }
            let order = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
            let moved = phase1_reward(v[order[0]], v[order[1]], v[order[2]], &w());
            prop_assert!((moved - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }

        #[test]
        fn phase2_bounded_above(ea in -1.0f64..1.0, eb in -0.1f64..0.1, em in -0.1f64..0.1,
                                (p, q, r) in (-0.17f64..0.17, -0.17f64..0.17, -0.17f64..0.17),
                                a in proptest::array::uniform3(-1.0f64..1.0)) {
            let err = AttitudeErrors { e_alpha: ea, e_beta: eb, e_mu: em };
            prop_assert!(phase2_reward(&err, p, q, r, &a, &w()) <= 11.0 + 1e-12);
        }

        #[test]
        fn exactly_one_phase_term((p, q, r) in rates(), alpha in -0.2f64..1.5) {
            let a = state(0.5, 0.0, 0.0, 1.0, 1.0, 1.0);
            let b = state(alpha, 0.01, -0.02, p, q, r);
            let (total, phase, c) = total_reward(&a, &b, &Targets::default(), &[0.1, 0.2, -0.3], &w());
            match phase {
                Phase::RateDamping => prop_assert!(c.phase1 != 0.0 && c.phase2 == 0.0),
                Phase::AttitudeTracking => prop_assert!(c.phase1 == 0.0),
            }
            prop_assert!((c.phase1 + c.phase2 + c.shaping - total).abs() <= 1e-12);
        }
    }
}
