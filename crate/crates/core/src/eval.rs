//! Closed-loop episode rollouts and recovery metrics shared by trained
//! policies and scripted baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::AircraftState;
use crate::env::{Action, Observation, SpinEnv, TrajectoryRow, ACT_DIM};
use crate::error::Result;
use crate::reward::Targets;

/// Rates must stay below this (rad/s) for the arrest window.
pub const RATE_ARREST_THRESHOLD: f64 = 0.17;
/// Length of the arrest window, s.
pub const RATE_ARREST_WINDOW_S: f64 = 5.0;

/// Anything that maps the current observation to a raw action in [-1, 1]^3.
/// Controllers are only consulted once the spin hold has ended.
pub trait Controller {
    fn act(&mut self, obs: &Observation, state: &AircraftState, targets: &Targets) -> Result<Action>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub episode: usize,
    pub seed: u64,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub steps: usize,
    pub terminated: bool,
    pub termination: Option<String>,
    /// Start of the first window of `RATE_ARREST_WINDOW_S` seconds with all
    /// rates below threshold.
    pub rate_arrest_time_s: Option<f64>,
    pub final_abs_e_alpha_rad: f64,
    /// Altitude when the controller took over minus the lowest altitude reached afterwards.
    pub altitude_loss_ft: f64,
}

/// First time `t_i` such that every row in `[t_i, t_i + window]` has all
/// rates strictly below `threshold` and the trajectory reaches `t_i + window`.
pub fn rate_arrest_time(rows: &[TrajectoryRow], threshold: f64, window: f64) -> Option<f64> {
    let mut start: Option<f64> = None;
    for row in rows {
        if row.p.abs().max(row.q.abs()).max(row.r.abs()) < threshold {
            let s = *start.get_or_insert(row.t);
            if row.t - s >= window - 1e-9 {
                return Some(s);
            }
        } else {
            start = None;
        }
    }
    None
}

/// Run one episode from `env.reset(seed)` to termination or truncation.
pub fn run_episode<C: Controller + ?Sized>(
    env: &mut SpinEnv,
    controller: &mut C,
    episode: usize,
    seed: u64,
) -> Result<(EpisodeReport, Vec<TrajectoryRow>)> {
    let mut obs = env.reset(seed);
    let mut rows = Vec::new();
    let mut total = 0.0;
    let mut takeover_h = None;
    let mut min_h = f64::INFINITY;
    let last = loop {
        let action = if env.in_hold() {
            [0.0; ACT_DIM]
        } else {
            takeover_h.get_or_insert(env.state().h);
            controller.act(&obs, env.state(), env.targets())?
        };
        let res = env.step(&action)?;
        total += res.reward;
        if takeover_h.is_some() {
            min_h = min_h.min(res.info.state.h);
        }
        rows.push(TrajectoryRow::from_step(&res));
        obs = res.observation;
        if res.done() {
            break res;
        }
    };
    let x = &last.info.state;
    let report = EpisodeReport {
        episode,
        seed,
        episode_return: total,
        steps: rows.len(),
        terminated: last.terminated,
        termination: last.info.termination.as_ref().map(|t| format!("{t:?}")),
        rate_arrest_time_s: rate_arrest_time(&rows, RATE_ARREST_THRESHOLD, RATE_ARREST_WINDOW_S),
        final_abs_e_alpha_rad: (x.alpha - env.targets().alpha).abs(),
        altitude_loss_ft: takeover_h.map_or(0.0, |h| (h - min_h).max(0.0)),
    };
    Ok((report, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    /// Mean over episodes that arrested the rates; `None` if none did.
    pub rate_arrest_time_s: Option<f64>,
    pub arrested_fraction: f64,
    pub final_abs_e_alpha_rad: f64,
    pub altitude_loss_ft: f64,
    #[serde(rename = "return")]
    pub mean_return: f64,
    pub episodes: Vec<EpisodeReport>,
}

impl EvalSummary {
    pub fn from_reports(episodes: Vec<EpisodeReport>) -> Self {
        let n = episodes.len().max(1) as f64;
        let mean = |f: fn(&EpisodeReport) -> f64| episodes.iter().map(f).sum::<f64>() / n;
        let arrested: Vec<f64> = episodes.iter().filter_map(|e| e.rate_arrest_time_s).collect();
        EvalSummary {
            rate_arrest_time_s: (!arrested.is_empty()).then(|| arrested.iter().sum::<f64>() / arrested.len() as f64),
            arrested_fraction: arrested.len() as f64 / n,
            final_abs_e_alpha_rad: mean(|e| e.final_abs_e_alpha_rad),
            altitude_loss_ft: mean(|e| e.altitude_loss_ft),
            mean_return: mean(|e| e.episode_return),
            episodes,
        }
    }
}

/// Per-episode reset seeds derived from one evaluation seed.
pub fn episode_seeds(seed: u64, episodes: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..episodes).map(|_| rng.random()).collect()
}

/// Run `episodes` episodes, handing each trajectory to `sink`.
pub fn evaluate<C, F>(env: &mut SpinEnv, controller: &mut C, episodes: usize, seed: u64, mut sink: F) -> Result<EvalSummary>
where
    C: Controller + ?Sized,
    F: FnMut(usize, &[TrajectoryRow]) -> Result<()>,
{
    let mut reports = Vec::with_capacity(episodes);
    for (i, s) in episode_seeds(seed, episodes).into_iter().enumerate() {
        let (report, rows) = run_episode(env, controller, i, s)?;
        sink(i, &rows)?;
        reports.push(report);
    }
    Ok(EvalSummary::from_reports(reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, rate: f64) -> TrajectoryRow {
        TrajectoryRow {
            t,
            v: 0.0,
            alpha: 0.0,
            beta: 0.0,
            p: rate,
            q: 0.0,
            r: 0.0,
            mu: 0.0,
            gamma: 0.0,
            chi: 0.0,
            phi: 0.0,
            theta: 0.0,
            psi: 0.0,
            h: 0.0,
            de: 0.0,
            da: 0.0,
            dr: 0.0,
            eta: 0.0,
            reward: 0.0,
            phase: 1,
        }
    }

    #[test]
    fn arrest_needs_full_window() {
        let rows: Vec<_> = (1..=1000).map(|i| {
            let t = i as f64 * 0.01;
            row(t, if t < 2.0 || (3.0..3.5).contains(&t) { 1.0 } else { 0.1 })
        }).collect();
        let t = rate_arrest_time(&rows, 0.17, 5.0).unwrap();
        assert!((t - 3.5).abs() < 1e-9);
        assert_eq!(rate_arrest_time(&rows[..800], 0.17, 5.0), None);
    }

    #[test]
    fn summary_means() {
        let mk = |ret: f64, arrest: Option<f64>| EpisodeReport {
            episode: 0,
            seed: 0,
            episode_return: ret,
            steps: 1,
            terminated: false,
            termination: None,
            rate_arrest_time_s: arrest,
            final_abs_e_alpha_rad: 0.1,
            altitude_loss_ft: 100.0,
        };
        let s = EvalSummary::from_reports(vec![mk(1.0, Some(4.0)), mk(3.0, None)]);
        assert_eq!(s.mean_return, 2.0);
        assert_eq!(s.rate_arrest_time_s, Some(4.0));
        assert_eq!(s.arrested_fraction, 0.5);
        let json = serde_json::to_value(&s).unwrap();
        for key in ["rate_arrest_time_s", "final_abs_e_alpha_rad", "altitude_loss_ft", "return"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
