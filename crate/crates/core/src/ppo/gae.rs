use crate::error::{Error, Result};

/// Generalized advantage estimates and value targets for one trajectory
/// segment. `dones[t]` marks a terminal transition (no bootstrap past it);
/// `bootstrap_value` is V(s_T) for a segment cut off without termination.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if values.len() != n {
        return Err(Error::LengthMismatch { what: "values", expected: n, got: values.len() });
    }
    if dones.len() != n {
        return Err(Error::LengthMismatch { what: "dones", expected: n, got: dones.len() });
    }
    let mut adv = vec![0.0; n];
    let mut next_value = bootstrap_value;
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}
