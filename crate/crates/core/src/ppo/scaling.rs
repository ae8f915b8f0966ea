//! Reward scaling by the running standard deviation of the discounted return.

use serde::{Deserialize, Serialize};

/// Welford statistics of `G_t = gamma * G_{t-1} + r_t`, accumulated over
/// every training transition. Rewards are divided by the standard deviation
/// of `G`; the mean is not subtracted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardScaler {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    /// Discounted return of the episode in progress.
    pub running: f64,
}

const MIN_STD: f64 = 1e-4;

impl RewardScaler {
    pub fn start_episode(&mut self) {
        self.running = 0.0;
    }

    /// Record `reward` and return it scaled by the updated statistics.
    pub fn scale(&mut self, reward: f64, gamma: f64) -> f64 {
        self.running = gamma * self.running + reward;
        self.count += 1;
        let delta = self.running - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (self.running - self.mean);
        reward / self.std()
    }

    pub fn std(&self) -> f64 {
        if self.count < 2 {
            return 1.0;
        }
        (self.m2 / self.count as f64).sqrt().max(MIN_STD)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_statistics() {
        let rewards = [1.0, -2.0, 0.5, 3.0, -1.0, 0.25];
        let gamma = 0.9;
        let mut s = RewardScaler::default();
        let mut g = 0.0;
        let mut seen = Vec::new();
        for r in rewards {
            let scaled = s.scale(r, gamma);
            g = gamma * g + r;
            seen.push(g);
            let n = seen.len() as f64;
            let mean = seen.iter().sum::<f64>() / n;
            let var = seen.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            let want = if seen.len() < 2 { r } else { r / var.sqrt() };
            assert!((scaled - want).abs() < 1e-12);
        }
    }

    #[test]
    fn episode_start_resets_running_return() {
        let mut s = RewardScaler::default();
        s.scale(5.0, 0.99);
        s.start_episode();
        assert_eq!(s.running, 0.0);
        assert_eq!(s.count, 1);
    }

    #[test]
    fn constant_return_is_floored() {
        let mut s = RewardScaler::default();
        s.scale(0.0, 0.99);
        assert_eq!(s.scale(0.0, 0.99), 0.0);
        assert_eq!(s.std(), MIN_STD);
    }
}
