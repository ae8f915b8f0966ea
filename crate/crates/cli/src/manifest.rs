use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Experiment;

pub const MANIFEST_FORMAT: &str = "spinrl-run-manifest";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResumeInfo {
    pub checkpoint: String,
    pub sha256: String,
}

/// Written at the start of every run. Passing it back as `--config`
/// repeats the run exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_sha256: String,
    pub seed: u64,
    pub start_time: String,
    pub build_profile: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume: Option<ResumeInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<bool>,
    pub config: Experiment,
}

impl Manifest {
    pub fn new(command: &str, config: &Experiment) -> Result<Self> {
        Ok(Manifest {
            format: MANIFEST_FORMAT.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_sha256: sha256_hex(config.canonical_json()?.as_bytes()),
            seed: config.seed,
            start_time: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            build_profile: if cfg!(debug_assertions) { "debug" } else { "release" }.into(),
            target: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
            resume: None,
            deterministic: None,
            config: config.clone(),
        })
    }

    /// Check the embedded config against its recorded hash.
    pub fn verify(&self) -> Result<()> {
        let actual = sha256_hex(self.config.canonical_json()?.as_bytes());
        if actual != self.config_sha256 {
            bail!("config_sha256 {} does not match the embedded config ({actual})", self.config_sha256);
        }
        if self.seed != self.config.seed {
            bail!("seed {} does not match the embedded config seed {}", self.seed, self.config.seed);
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}
