//! Fixed-step classical Runge-Kutta.

use crate::error::{Error, Result};

/// Advance `y` by one classical fourth-order Runge-Kutta step of size `dt`.
///
/// `f(t, y)` returns the time derivative. Errors raised by `f` at any stage
/// are propagated unchanged; a non-finite result is reported as
/// [`Error::Numerical`].
pub fn rk4_step<const N: usize, F>(t: f64, y: &[f64; N], dt: f64, mut f: F) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(dt > 0.0) {
        return Err(Error::Numerical(format!("step size must be positive, got {dt}")));
    }
    let half = 0.5 * dt;

    let k1 = f(t, y)?;
    let k2 = f(t + half, &offset(y, &k1, half))?;
    let k3 = f(t + half, &offset(y, &k2, half))?;
    let k4 = f(t + dt, &offset(y, &k3, dt))?;

    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if !out[i].is_finite() {
            return Err(Error::Numerical(format!("non-finite state component {i} after RK4 step")));
        }
    }
    Ok(out)
}

#[inline]
fn offset<const N: usize>(y: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}
