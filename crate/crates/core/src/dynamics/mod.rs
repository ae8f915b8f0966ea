//! Rigid-body equations of motion in wind axes with Euler-angle kinematics.
//!
//! The integrated state is the eight-component core `[V, alpha, beta, p, q,
//! r, mu, gamma]` plus heading `chi`, Euler angles `phi, theta, psi` and
//! altitude `h`. Inertia is diagonal and thrust is `Tm * eta` along the body
//! x axis.

mod atmosphere;
mod integrator;

use serde::{Deserialize, Serialize};

pub use atmosphere::{air_density, AtmosphereModel, DENSITY_SCALE_HEIGHT_FT, SEA_LEVEL_DENSITY};
pub use integrator::rk4_step;

use crate::aero::{AeroInputs, AeroModel, CoefficientSet};
use crate::error::{Error, Result};

/// Smallest admissible |cos| for the secant/tangent divisors.
pub const TRIG_TOLERANCE: f64 = 1e-6;

/// Number of integrated state components.
pub const STATE_DIM: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AircraftState {
    /// Airspeed, ft/s.
    pub v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Bank angle about the velocity vector.
    pub mu: f64,
    /// Flight-path angle.
    pub gamma: f64,
    /// Heading of the velocity vector.
    pub chi: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    /// Altitude, ft, positive up.
    pub h: f64,
    /// Elapsed time, s.
    pub t: f64,
}

impl AircraftState {
    /// `[V, alpha, beta, p, q, r, mu, gamma]`.
    pub fn core(&self) -> [f64; 8] {
        [self.v, self.alpha, self.beta, self.p, self.q, self.r, self.mu, self.gamma]
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.v, self.alpha, self.beta, self.p, self.q, self.r, self.mu, self.gamma, self.chi, self.phi,
            self.theta, self.psi, self.h,
        ]
    }

    pub fn from_array(a: &[f64; STATE_DIM], t: f64) -> Self {
        AircraftState {
            v: a[0],
            alpha: a[1],
            beta: a[2],
            p: a[3],
            q: a[4],
            r: a[5],
            mu: a[6],
            gamma: a[7],
            chi: a[8],
            phi: a[9],
            theta: a[10],
            psi: a[11],
            h: a[12],
            t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite()) && self.t.is_finite()
    }

    pub fn max_abs_rate(&self) -> f64 {
        self.p.abs().max(self.q.abs()).max(self.r.abs())
    }
}

/// Time derivative of every integrated [`AircraftState`] component.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateDerivative {
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
}

impl StateDerivative {
    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.v, self.alpha, self.beta, self.p, self.q, self.r, self.mu, self.gamma, self.chi, self.phi,
            self.theta, self.psi, self.h,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub delta_e: f64,
    pub delta_a: f64,
    pub delta_r: f64,
    /// Throttle fraction in [0, 1].
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelLimits {
    pub min: f64,
    pub max: f64,
}

impl ChannelLimits {
    pub const fn new(min: f64, max: f64) -> Self {
        ChannelLimits { min, max }
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

/// Actuator deflection limits, rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlLimits {
    pub elevator: ChannelLimits,
    pub aileron: ChannelLimits,
    pub rudder: ChannelLimits,
}

impl Default for ControlLimits {
    fn default() -> Self {
        ControlLimits {
            elevator: ChannelLimits::new(-0.436, 0.175),
            aileron: ChannelLimits::new(-0.436, 0.436),
            rudder: ChannelLimits::new(-0.524, 0.524),
        }
    }
}

impl ControlLimits {
    pub fn validate(&self) -> Result<()> {
        for (name, ch) in [("elevator", self.elevator), ("aileron", self.aileron), ("rudder", self.rudder)] {
            if !(ch.min.is_finite() && ch.max.is_finite() && ch.min < ch.max) {
                return Err(Error::config(format!(
                    "limits.{name}: min ({}) must be below max ({})",
                    ch.min, ch.max
                )));
            }
        }
        Ok(())
    }
}

/// Clamp each surface deflection into its channel limits. Throttle passes through.
pub fn saturate(u: ControlInput, limits: &ControlLimits) -> ControlInput {
    ControlInput {
        delta_e: limits.elevator.clamp(u.delta_e),
        delta_a: limits.aileron.clamp(u.delta_a),
        delta_r: limits.rudder.clamp(u.delta_r),
        eta: u.eta,
    }
}

/// Mass, geometry and atmosphere data for the airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AircraftParams {
    #[serde(rename = "mass_slug")]
    pub mass: f64,
    #[serde(rename = "wing_area_ft2")]
    pub wing_area: f64,
    #[serde(rename = "span_ft")]
    pub span: f64,
    #[serde(rename = "chord_ft")]
    pub chord: f64,
    #[serde(rename = "Ix")]
    pub ix: f64,
    #[serde(rename = "Iy")]
    pub iy: f64,
    #[serde(rename = "Iz")]
    pub iz: f64,
    #[serde(rename = "Tm_lbf")]
    pub max_thrust: f64,
    #[serde(rename = "gravity_ftps2")]
    pub gravity: f64,
    #[serde(default)]
    pub atmosphere: AtmosphereModel,
    #[serde(default = "default_rho0")]
    pub rho0: f64,
    #[serde(default)]
    pub equations: EquationSet,
}

/// Which form of the alpha, mu and gamma force equations to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EquationSet {
    /// Signs and groupings exactly as published. Level flight cannot be
    /// trimmed with q = 0 in this form.
    #[default]
    AsPrinted,
    /// Conventional wind-axis signs: lift opposes alpha and raises gamma, and
    /// the `sin(mu) tan(gamma)` term is expanded with its force factor.
    Conventional,
}

fn default_rho0() -> f64 {
    SEA_LEVEL_DENSITY
}

pub const DEFAULT_AIRCRAFT_JSON: &str = include_str!("../../../../configs/aircraft_harv.json");

impl AircraftParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass_slug", self.mass),
            ("wing_area_ft2", self.wing_area),
            ("span_ft", self.span),
            ("chord_ft", self.chord),
            ("Ix", self.ix),
            ("Iy", self.iy),
            ("Iz", self.iz),
            ("Tm_lbf", self.max_thrust),
            ("gravity_ftps2", self.gravity),
            ("rho0", self.rho0),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("aircraft.{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::config(format!("aircraft params: {e}")))?;
        // Keys starting with '_' are annotations.
        if let Some(obj) = value.as_object_mut() {
            obj.retain(|k, _| !k.starts_with('_'));
        }
        let params: AircraftParams =
            serde_json::from_value(value).map_err(|e| Error::config(format!("aircraft params: {e}")))?;
        params.validate()?;
        Ok(params)
    }

    pub fn density(&self, h: f64) -> f64 {
        air_density(self.atmosphere, self.rho0, h)
    }
}

impl Default for AircraftParams {
    fn default() -> Self {
        AircraftParams::from_json(DEFAULT_AIRCRAFT_JSON).expect("shipped aircraft params are valid")
    }
}

fn guard_cos(value: f64, what: &str) -> Result<f64> {
    if value.abs() < TRIG_TOLERANCE {
        Err(Error::Domain(format!("cos({what}) = {value:e} below tolerance")))
    } else {
        Ok(value)
    }
}

/// Equations of motion with the aerodynamic coefficients already evaluated.
pub fn derivative_with_coefficients(
    x: &AircraftState,
    u: &ControlInput,
    params: &AircraftParams,
    c: &CoefficientSet,
    rho: f64,
) -> Result<StateDerivative> {
    if !(x.v > 0.0) {
        return Err(Error::Domain(format!("airspeed must be positive, got {}", x.v)));
    }
    let cos_beta = guard_cos(x.beta.cos(), "beta")?;
    let cos_theta = guard_cos(x.theta.cos(), "theta")?;
    let cos_gamma = guard_cos(x.gamma.cos(), "gamma")?;

    let AircraftParams { mass: m, wing_area: s, span: b, chord, ix, iy, iz, gravity: g, .. } = *params;
    let (sa, ca) = x.alpha.sin_cos();
    let (sb, _) = x.beta.sin_cos();
    let (smu, cmu) = x.mu.sin_cos();
    let (sg, _) = x.gamma.sin_cos();
    let (sphi, cphi) = x.phi.sin_cos();
    let tan_beta = sb / cos_beta;
    let tan_gamma = sg / cos_gamma;
    let tan_theta = x.theta.sin() / cos_theta;

    let qbar_s = 0.5 * rho * x.v * x.v * s;
    let thrust = params.max_thrust * u.eta;
    let weight = m * g;
    let mv = m * x.v;
    let (p, q, r) = (x.p, x.q, x.r);

    let lift = qbar_s * c.cl;
    let side = qbar_s * c.cy;

    let v_dot = (thrust * ca * cos_beta - qbar_s * c.cd - weight * sg) / m;
    let alpha_dot = match params.equations {
        EquationSet::AsPrinted => q - (p * ca + r * sa) * sb / cos_beta + (thrust * sa + lift - weight * cmu * cos_gamma) / mv,
        EquationSet::Conventional => {
            q - (p * ca + r * sa) * tan_beta - (thrust * sa + lift - weight * cmu * cos_gamma) / (mv * cos_beta)
        }
    };
    let beta_dot = (-thrust * ca * sb + side + weight * smu * cos_gamma) / mv + (p * sa - r * ca);

    let p_dot = (iy - iz) / ix * q * r + qbar_s * b * c.c_roll / ix;
    let q_dot = (iz - ix) / iy * p * r + qbar_s * chord * c.c_pitch / iy;
    let r_dot = (ix - iy) / iz * p * q + qbar_s * b * c.c_yaw / iz;

    let phi_dot = p + q * sphi * tan_theta + r * cphi * tan_theta;
    let theta_dot = q * cphi - r * sphi;
    let psi_dot = (q * sphi + r * cphi) / cos_theta;
    let h_dot = x.v * sg;

    let (mu_dot, gamma_dot) = match params.equations {
        EquationSet::AsPrinted => (
            // The bare `sin(mu) tan(gamma)` term carries no force factor; kept as is.
            (p * ca + r * sa) / cos_beta
                + (lift * tan_beta + thrust * sa + smu * tan_gamma - weight * cmu * cos_gamma * tan_beta
                    + side * cmu * tan_gamma)
                    / mv,
            (thrust * (sa * cmu + ca * sb * smu) - lift * cmu - weight * cos_gamma - side * smu) / mv,
        ),
        EquationSet::Conventional => (
            (p * ca + r * sa) / cos_beta
                + ((lift + thrust * sa) * (tan_gamma * smu + tan_beta) - weight * cmu * cos_gamma * tan_beta
                    + side * cmu * tan_gamma)
                    / mv,
            (thrust * (sa * cmu + ca * sb * smu) + lift * cmu - weight * cos_gamma - side * smu) / mv,
        ),
    };
    let chi_dot = (thrust * (sa * smu - ca * sb * cmu) + lift * smu + side * cmu) / (mv * cos_gamma);

    let d = StateDerivative {
        v: v_dot,
        alpha: alpha_dot,
        beta: beta_dot,
        p: p_dot,
        q: q_dot,
        r: r_dot,
        mu: mu_dot,
        gamma: gamma_dot,
        chi: chi_dot,
        phi: phi_dot,
        theta: theta_dot,
        psi: psi_dot,
        h: h_dot,
    };
    if d.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite state derivative".into()));
    }
    Ok(d)
}

pub fn aero_inputs(x: &AircraftState, u: &ControlInput) -> AeroInputs {
    AeroInputs {
        alpha: x.alpha,
        beta: x.beta,
        p: x.p,
        q: x.q,
        r: x.r,
        v: x.v,
        de: u.delta_e,
        da: u.delta_a,
        dr: u.delta_r,
    }
}

/// Full state derivative: coefficient evaluation followed by the equations of motion.
pub fn state_derivative(
    x: &AircraftState,
    u: &ControlInput,
    params: &AircraftParams,
    aero: &AeroModel,
    rho: f64,
) -> Result<StateDerivative> {
    if !(x.v > 0.0) {
        return Err(Error::Domain(format!("airspeed must be positive, got {}", x.v)));
    }
    let c = aero.evaluate(&aero_inputs(x, u), params.span, params.chord)?;
    derivative_with_coefficients(x, u, params, &c, rho)
}

/// One RK4 step of size `dt`. Density is re-evaluated from altitude at each stage.
/// `u` is held constant over the step and is expected to be saturated already.
pub fn integrate_step(
    x: &AircraftState,
    u: &ControlInput,
    dt: f64,
    params: &AircraftParams,
    aero: &AeroModel,
) -> Result<AircraftState> {
    let y = rk4_step(x.t, &x.to_array(), dt, |t, y| {
        let s = AircraftState::from_array(y, t);
        Ok(state_derivative(&s, u, params, aero, params.density(s.h))?.to_array())
    })?;
    Ok(AircraftState::from_array(&y, x.t + dt))
}

type Mat3 = [[f64; 3]; 3];

fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]]
}

fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]]
}

fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Body Euler angles `(phi, theta, psi)` for the attitude implied by the
/// aerodynamic angles and the wind-axis orientation `(mu, gamma, chi)`.
pub fn euler_from_wind_angles(alpha: f64, beta: f64, mu: f64, gamma: f64, chi: f64) -> (f64, f64, f64) {
    // earth -> wind: chi about z, gamma about y, mu about x; wind -> body: -beta about z, alpha about y.
    let earth_to_wind = mat_mul(&rot_x(mu), &mat_mul(&rot_y(gamma), &rot_z(chi)));
    let wind_to_body = mat_mul(&rot_y(alpha), &rot_z(-beta));
    let c = mat_mul(&wind_to_body, &earth_to_wind);
    let theta = (-c[0][2]).clamp(-1.0, 1.0).asin();
    let phi = c[1][2].atan2(c[2][2]);
    let psi = c[0][1].atan2(c[0][0]);
    (phi, theta, psi)
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    if a > -PI && a <= PI {
        return a;
    }
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> AircraftParams {
        AircraftParams::default()
    }

    fn level() -> AircraftState {
        AircraftState { v: 400.0, alpha: 0.1, h: 8500.0, ..Default::default() }
    }

    #[test]
    fn saturation_examples() {
        let lim = ControlLimits::default();
        let u = saturate(ControlInput { delta_e: 0.5, delta_a: 0.0, delta_r: -1.0, eta: 0.7 }, &lim);
        assert_eq!(u.delta_e, 0.175);
        assert_eq!(u.delta_a, 0.0);
        assert_eq!(u.delta_r, -0.524);
        assert_eq!(u.eta, 0.7);
        let u = saturate(ControlInput { delta_e: 0.0, ..Default::default() }, &lim);
        assert_eq!(u.delta_e, 0.0);
    }

    #[test]
    fn reversed_limits_are_rejected() {
        let mut lim = ControlLimits::default();
        lim.elevator = ChannelLimits::new(0.175, -0.436);
        let err = lim.validate().unwrap_err().to_string();
        assert!(err.contains("elevator"), "{err}");
    }

    #[test]
    fn zero_forces_level_flight_keeps_speed() {
        let u = ControlInput::default();
        let d = state_derivative(&level(), &u, &params(), &AeroModel::zero(), SEA_LEVEL_DENSITY).unwrap();
        assert_eq!(d.v, 0.0);
    }

    #[test]
    fn gravity_only_flight_path_rate() {
        let x = level();
        let p = params();
        let d = state_derivative(&x, &ControlInput::default(), &p, &AeroModel::zero(), SEA_LEVEL_DENSITY).unwrap();
        assert!((d.gamma - (-p.gravity / x.v)).abs() < 1e-15);
    }

    #[test]
    fn pitch_attitude_rate_equals_q_at_wings_level() {
        let x = AircraftState { q: 0.3, r: -0.7, ..level() };
        let d = state_derivative(&x, &ControlInput::default(), &params(), &AeroModel::zero(), SEA_LEVEL_DENSITY).unwrap();
        assert_eq!(d.theta, 0.3);
    }

    #[test]
    fn no_roll_acceleration_without_moment_or_coupling() {
        let x = AircraftState { p: 1.2, q: 0.0, r: 0.0, ..level() };
        let d = state_derivative(&x, &ControlInput::default(), &params(), &AeroModel::zero(), SEA_LEVEL_DENSITY).unwrap();
        assert_eq!(d.p, 0.0);
    }

    #[test]
    fn altitude_increases_when_climbing() {
        let x = AircraftState { gamma: 0.2, ..level() };
        let d = state_derivative(&x, &ControlInput::default(), &params(), &AeroModel::zero(), SEA_LEVEL_DENSITY).unwrap();
        assert!((d.h - 400.0 * 0.2f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn gimbal_lock_is_domain_error() {
        let x = AircraftState { theta: std::f64::consts::FRAC_PI_2, ..level() };
        let err = state_derivative(&x, &ControlInput::default(), &params(), &AeroModel::zero(), SEA_LEVEL_DENSITY);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn vertical_flight_path_is_domain_error() {
        let x = AircraftState { gamma: -std::f64::consts::FRAC_PI_2, ..level() };
        let err = state_derivative(&x, &ControlInput::default(), &params(), &AeroModel::zero(), SEA_LEVEL_DENSITY);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn zero_airspeed_is_domain_error() {
        let x = AircraftState { v: 0.0, ..level() };
        let err = state_derivative(&x, &ControlInput::default(), &params(), &AeroModel::zero(), SEA_LEVEL_DENSITY);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn integrate_advances_time() {
        let x = level();
        let y = integrate_step(&x, &ControlInput::default(), 0.01, &params(), &AeroModel::zero()).unwrap();
        assert!((y.t - 0.01).abs() < 1e-15);
        assert!(y.is_finite());
    }

    #[test]
    fn shipped_params_load() {
        let p = params();
        assert!(p.mass > 0.0 && p.iy > p.ix);
        assert_eq!(p.atmosphere, AtmosphereModel::Constant);
        assert_eq!(p.rho0, 0.002377);
    }

    #[test]
    fn unknown_param_key_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_AIRCRAFT_JSON).unwrap();
        v["wingspan"] = 10.0.into();
        assert!(AircraftParams::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_AIRCRAFT_JSON).unwrap();
        v["Ix"] = (-1.0).into();
        assert!(AircraftParams::from_json(&v.to_string()).unwrap_err().to_string().contains("Ix"));
    }

    #[test]
    fn euler_reduces_to_pitch_sum_in_symmetric_flight() {
        let (phi, theta, psi) = euler_from_wind_angles(0.2, 0.0, 0.0, 0.1, 0.0);
        assert!(phi.abs() < 1e-15 && psi.abs() < 1e-15);
        assert!((theta - 0.3).abs() < 1e-15);
    }

    #[test]
    fn euler_bank_matches_mu_at_zero_alpha() {
        let (phi, theta, psi) = euler_from_wind_angles(0.0, 0.0, 0.4, 0.0, 0.7);
        assert!((phi - 0.4).abs() < 1e-14 && theta.abs() < 1e-14 && (psi - 0.7).abs() < 1e-14);
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert_eq!(wrap_angle(0.5), 0.5);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert!((wrap_angle(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn saturate_is_idempotent_and_bounded(de in -5.0f64..5.0, da in -5.0f64..5.0, dr in -5.0f64..5.0, eta in 0.0f64..1.0) {
            let lim = ControlLimits::default();
            let u = ControlInput { delta_e: de, delta_a: da, delta_r: dr, eta };
            let s = saturate(u, &lim);
            prop_assert_eq!(saturate(s, &lim), s);
            prop_assert!(lim.elevator.contains(s.delta_e) && lim.aileron.contains(s.delta_a) && lim.rudder.contains(s.delta_r));
            prop_assert_eq!(s.eta, eta);
            if lim.elevator.contains(de) { prop_assert_eq!(s.delta_e, de); }
            if lim.aileron.contains(da) { prop_assert_eq!(s.delta_a, da); }
            if lim.rudder.contains(dr) { prop_assert_eq!(s.delta_r, dr); }
        }

        #[test]
        fn derivative_is_deterministic(alpha in -0.2f64..1.5, beta in -0.5f64..0.5, p in -3.0f64..3.0, r in -3.0f64..3.0, mu in -3.0f64..3.0, gamma in -1.4f64..1.4) {
            let x = AircraftState { v: 250.0, alpha, beta, p, q: 0.1, r, mu, gamma, h: 5000.0, ..Default::default() };
            let u = ControlInput { delta_e: -0.1, delta_a: 0.1, delta_r: 0.2, eta: 0.3 };
            let aero = crate::aero::default_aero_model();
            let a = state_derivative(&x, &u, &params(), &aero, SEA_LEVEL_DENSITY);
            let b = state_derivative(&x, &u, &params(), &aero, SEA_LEVEL_DENSITY);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    for (x, y) in a.to_array().iter().zip(b.to_array()) {
                        prop_assert_eq!(x.to_bits(), y.to_bits());
                    }
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "nondeterministic outcome"),
            }
        }
    }
}
