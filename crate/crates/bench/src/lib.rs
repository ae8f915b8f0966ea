//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use spinrl::aero::{default_aero_model, AeroModel};
use spinrl::dynamics::{euler_from_wind_angles, AircraftParams, AircraftState, ControlInput};

/// Developed-spin state at 8500 ft.
pub fn spin_state() -> AircraftState {
    let (alpha, beta, mu, gamma) = (1.2375, 0.0382, -1.3508, -1.5075);
    let (phi, theta, psi) = euler_from_wind_angles(alpha, beta, mu, gamma, 0.0);
    AircraftState {
        v: 207.576,
        alpha,
        beta,
        p: -0.6163,
        q: 0.1784,
        r: -1.4645,
        mu,
        gamma,
        chi: 0.0,
        phi,
        theta,
        psi,
        h: 8500.0,
        t: 0.0,
    }
}

pub fn controls() -> ControlInput {
    ControlInput { delta_e: -0.1, delta_a: 0.05, delta_r: 0.2, eta: 0.2 }
}

pub fn model() -> (AircraftParams, Arc<AeroModel>) {
    (AircraftParams::default(), Arc::new(default_aero_model()))
}
