use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use spinrl::aero::{load_aero_config, AeroModel, AeroModelConfig};
use spinrl::baseline::BaselineConfig;
use spinrl::dynamics::{AircraftParams, ControlLimits};
use spinrl::env::{EnvConfig, SpinEnv};
use spinrl::ppo::PpoConfig;

use crate::manifest::{Manifest, MANIFEST_FORMAT};

/// Experiment file as written by hand. Component paths are relative to the
/// file's directory; `out_dir` is relative to the working directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default)]
    pub label: String,
    pub aircraft: PathBuf,
    pub aero: PathBuf,
    pub scenario: PathBuf,
    pub ppo: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Write a checkpoint every this many updates; 0 keeps only the final one.
    #[serde(default)]
    pub checkpoint_interval: usize,
    #[serde(default = "BaselineConfig::pare")]
    pub baseline: BaselineConfig,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_eval_episodes() -> usize {
    10
}

/// Fully resolved experiment: every component inlined. This is what the run
/// manifest stores and hashes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub label: String,
    pub seed: u64,
    pub aircraft: AircraftParams,
    pub aero: AeroModelConfig,
    pub scenario: EnvConfig,
    pub ppo: PpoConfig,
    pub checkpoint_interval: usize,
    pub baseline: BaselineConfig,
    pub eval_episodes: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedExperiment {
    pub experiment: Experiment,
    pub out_dir: PathBuf,
    /// Set when the config was a run manifest.
    pub manifest: Option<Manifest>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

impl Experiment {
    /// Set the master seed; the scenario and trainer seeds follow it.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.scenario.seed = seed;
        self.ppo.seed = seed;
    }

    /// Cross-check every component.
    pub fn validate(&self) -> Result<()> {
        self.aircraft.validate().context("aircraft")?;
        AeroModel::from_config(self.aero.clone()).context("aero")?;
        self.scenario.validate().context("scenario")?;
        self.ppo.validate().context("ppo")?;
        self.baseline.validate(&self.scenario.limits).context("baseline")?;
        Ok(())
    }

    /// Differences from the published actuator box, for display.
    pub fn limit_notes(&self) -> Vec<String> {
        let table = ControlLimits::default();
        let l = &self.scenario.limits;
        let mut notes = Vec::new();
        for (name, got, want) in
            [("elevator", l.elevator, table.elevator), ("aileron", l.aileron, table.aileron), ("rudder", l.rudder, table.rudder)]
        {
            if got != want {
                notes.push(format!(
                    "limits.{name} [{}, {}] differs from the reference [{}, {}]",
                    got.min, got.max, want.min, want.max
                ));
            }
        }
        notes
    }

    pub fn aero_model(&self) -> Result<Arc<AeroModel>> {
        Ok(Arc::new(AeroModel::from_config(self.aero.clone())?))
    }

    pub fn env(&self) -> Result<SpinEnv> {
        Ok(SpinEnv::new(self.scenario.clone(), self.aircraft, self.aero_model()?)?)
    }

    pub fn env_with(&self, scenario: EnvConfig) -> Result<SpinEnv> {
        Ok(SpinEnv::new(scenario, self.aircraft, self.aero_model()?)?)
    }

    /// Canonical JSON used for hashing.
    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Load an experiment file or a run manifest (recognized by its `format` key).
pub fn load_experiment(path: &Path) -> Result<LoadedExperiment> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("format").and_then(|v| v.as_str()) == Some(MANIFEST_FORMAT) {
        let manifest: Manifest =
            serde_json::from_value(value).with_context(|| format!("reading manifest {}", path.display()))?;
        manifest.verify().with_context(|| format!("manifest {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let experiment = manifest.config.clone();
        experiment.validate()?;
        return Ok(LoadedExperiment { experiment, out_dir: dir.join("rerun"), manifest: Some(manifest) });
    }

    let file: ExperimentFile =
        serde_json::from_value(value).with_context(|| format!("parsing experiment {}", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let part = |p: &Path| dir.join(p);

    let aircraft_path = part(&file.aircraft);
    let aircraft = AircraftParams::from_json(&read(&aircraft_path)?)
        .with_context(|| format!("aircraft file {}", aircraft_path.display()))?;
    let aero_path = part(&file.aero);
    let aero = load_aero_config(&read(&aero_path)?)
        .with_context(|| format!("aero file {}", aero_path.display()))?
        .config()
        .clone();
    let scenario_path = part(&file.scenario);
    let scenario = EnvConfig::from_json(&read(&scenario_path)?)
        .with_context(|| format!("scenario file {}", scenario_path.display()))?;
    let ppo_path = part(&file.ppo);
    let ppo = PpoConfig::from_json(&read(&ppo_path)?).with_context(|| format!("ppo file {}", ppo_path.display()))?;
    if file.eval_episodes == 0 {
        bail!("eval_episodes must be >= 1");
    }

    let mut experiment = Experiment {
        label: file.label,
        seed: file.seed,
        aircraft,
        aero,
        scenario,
        ppo,
        checkpoint_interval: file.checkpoint_interval,
        baseline: file.baseline,
        eval_episodes: file.eval_episodes,
    };
    experiment.set_seed(file.seed);
    experiment.validate()?;
    Ok(LoadedExperiment { experiment, out_dir: file.out_dir, manifest: None })
}
