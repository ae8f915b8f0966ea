//! Diagonal Gaussian policy with a state-independent log standard deviation.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// `0.5 * ln(2 pi)`.
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

pub fn clamp_log_std(v: f64) -> f64 {
    v.clamp(LOG_STD_MIN, LOG_STD_MAX)
}

/// Whether the raw parameter lies strictly inside the clamp range, i.e. the
/// clamp passes its gradient through.
pub fn log_std_active(v: f64) -> bool {
    v > LOG_STD_MIN && v < LOG_STD_MAX
}

/// Log density of `action` under N(mean, diag(exp(log_std))^2). `log_std` is
/// used as given.
pub fn log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) * (-ls).exp();
            -0.5 * z * z - ls - HALF_LN_TWO_PI
        })
        .sum()
}

pub fn entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 + HALF_LN_TWO_PI).sum()
}

/// Draw `mean + exp(log_std) * z` and return it with its log density.
/// `log_std` is clamped first.
pub fn sample<R: Rng + ?Sized>(mean: &[f64], log_std: &[f64], rng: &mut R) -> (Vec<f64>, f64) {
    let ls: Vec<f64> = log_std.iter().map(|&v| clamp_log_std(v)).collect();
    let action: Vec<f64> = mean
        .iter()
        .zip(&ls)
        .map(|(m, l)| {
            let z: f64 = rng.sample(StandardNormal);
            m + l.exp() * z
        })
        .collect();
    let lp = log_prob(mean, &ls, &action);
    (action, lp)
}

/// Log density at the mode.
pub fn mode_log_prob(log_std: &[f64]) -> f64 {
    -log_std.iter().sum::<f64>() - 0.5 * log_std.len() as f64 * (2.0 * PI).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_at_mean() {
        let ls = [0.1, -0.3, 0.5];
        let m = [0.2, 0.0, -1.0];
        let want = -(0.1 - 0.3 + 0.5) - 1.5 * (2.0 * PI).ln();
        assert!((log_prob(&m, &ls, &m) - want).abs() < 1e-14);
        assert!((mode_log_prob(&ls) - want).abs() < 1e-14);
    }

    #[test]
    fn matches_scalar_normal_density() {
        let (m, s, a) = (0.4f64, 0.7f64, -0.2f64);
        let want = (-(a - m).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt());
        assert!((log_prob(&[m], &[s.ln()], &[a]) - want.ln()).abs() < 1e-13);
    }

    #[test]
    fn entropy_of_unit_normal() {
        assert!((entropy(&[0.0]) - 0.5 * (2.0 * PI * std::f64::consts::E).ln()).abs() < 1e-14);
    }

    #[test]
    fn vanishing_std_returns_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean = [0.3, -0.2, 0.9];
        for _ in 0..1000 {
            let (a, _) = sample(&mean, &[-20.0; 3], &mut rng);
            for (x, m) in a.iter().zip(&mean) {
                // log_std clamps to -5; |z| beyond 6 has probability ~1e-9.
                assert!((x - m).abs() < 6.0 * (-5f64).exp());
            }
        }
    }

    #[test]
    fn sample_mean_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mean = [0.5, -1.0, 0.0];
        let ls = [0.0, -1.0, 0.5];
        let n = 100_000;
        let mut acc = [0.0; 3];
        for _ in 0..n {
            let (a, _) = sample(&mean, &ls, &mut rng);
            for i in 0..3 {
                acc[i] += a[i];
            }
        }
        for i in 0..3 {
            let se = ls[i].exp() / (n as f64).sqrt();
            assert!((acc[i] / n as f64 - mean[i]).abs() < 3.0 * se);
        }
    }

    #[test]
    fn sample_reports_its_own_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, lp) = sample(&[0.1, 0.2, 0.3], &[0.0, 3.0, -0.5], &mut rng);
        assert_eq!(lp, log_prob(&[0.1, 0.2, 0.3], &[0.0, 2.0, -0.5], &a));
    }
}
