use serde::{Deserialize, Serialize};

/// Sea-level standard density, slug/ft^3.
pub const SEA_LEVEL_DENSITY: f64 = 0.002377;

/// Density scale height of the exponential atmosphere fit, ft.
pub const DENSITY_SCALE_HEIGHT_FT: f64 = 33_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AtmosphereModel {
    #[default]
    Constant,
    /// Exponential approximation of the standard atmosphere anchored at `rho0`.
    Standard,
}

/// Air density in slug/ft^3 at altitude `h` (ft). Negative altitudes are
/// treated as sea level.
pub fn air_density(model: AtmosphereModel, rho0: f64, h: f64) -> f64 {
    match model {
        AtmosphereModel::Constant => rho0,
        AtmosphereModel::Standard => rho0 * (-h.max(0.0) / DENSITY_SCALE_HEIGHT_FT).exp(),
    }
}
