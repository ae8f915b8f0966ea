use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use spinrl::baseline::{BaselineConfig, BaselineController};
use spinrl::env::{write_trajectory_csv, SpinEnv};
use spinrl::eval::{evaluate, Controller, EvalSummary};
use spinrl::ppo::{Checkpoint, PpoController, Trainer, UpdateMetrics};

use crate::config::{load_experiment, Experiment};
use crate::manifest::{sha256_hex, Manifest, ResumeInfo};

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    pub config: PathBuf,
    /// Resume from this checkpoint.
    pub checkpoint: Option<PathBuf>,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub out_dir: PathBuf,
    pub metrics: PathBuf,
    pub final_checkpoint: PathBuf,
    pub updates: usize,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub config: PathBuf,
    pub checkpoint: PathBuf,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct BaselineOptions {
    pub config: PathBuf,
    /// `neutral` or `pare`; defaults to the experiment's baseline section.
    pub kind: Option<String>,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn train(opts: &TrainOptions) -> Result<TrainOutcome> {
    let loaded = load_experiment(&opts.config)?;
    let mut exp = loaded.experiment;
    if let Some(seed) = opts.seed {
        exp.set_seed(seed);
    }
    if let Some(n) = opts.episodes {
        exp.ppo.total_episodes = n;
    }
    exp.validate()?;

    // A manifest that recorded a resume names its checkpoint; honour it.
    let resume = match (&opts.checkpoint, loaded.manifest.as_ref().and_then(|m| m.resume.clone())) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(info)) => Some(PathBuf::from(info.checkpoint)),
        (None, None) => None,
    };

    let out_dir = opts.out.clone().unwrap_or(loaded.out_dir);
    create_dir(&out_dir)?;
    let ckpt_dir = out_dir.join("checkpoints");
    if exp.checkpoint_interval > 0 {
        create_dir(&ckpt_dir)?;
    }

    let mut manifest = Manifest::new("train", &exp)?;
    let env = exp.env()?;
    let mut trainer = match &resume {
        Some(path) => {
            let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let sha = sha256_hex(&bytes);
            if let Some(info) = loaded.manifest.as_ref().and_then(|m| m.resume.as_ref()) {
                if info.sha256 != sha {
                    bail!("checkpoint {} changed since the manifest was written", path.display());
                }
            }
            manifest.resume = Some(ResumeInfo { checkpoint: path.display().to_string(), sha256: sha });
            let ck = Checkpoint::from_json(std::str::from_utf8(&bytes)?)
                .with_context(|| format!("loading checkpoint {}", path.display()))?;
            if ck.agent.actor.sizes[1..ck.agent.actor.sizes.len() - 1] != exp.ppo.hidden[..] {
                bail!("checkpoint network {:?} does not match ppo.hidden {:?}", ck.agent.actor.sizes, exp.ppo.hidden);
            }
            Trainer::resume(env, ck, Some(exp.ppo.total_episodes))?
        }
        None => Trainer::new(env, exp.ppo.clone())?,
    };
    manifest.write(&out_dir.join("manifest.json"))?;

    let metrics_path = out_dir.join("metrics.csv");
    let file = File::create(&metrics_path).with_context(|| format!("creating {}", metrics_path.display()))?;
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
    csv.write_record(spinrl::ppo::METRICS_HEADER.split(','))?;
    csv.flush()?;

    let interval = exp.checkpoint_interval;
    let quiet = opts.quiet;
    let final_ck = trainer.train(|m: &UpdateMetrics, t: &Trainer| {
        let write = |csv: &mut csv::Writer<BufWriter<File>>| -> Result<()> {
            csv.serialize(m)?;
            csv.flush()?;
            if interval > 0 && m.update % interval == 0 {
                t.checkpoint().save(ckpt_dir.join(format!("update_{:05}.json", m.update)))?;
            }
            Ok(())
        };
        write(&mut csv).map_err(|e| spinrl::Error::Config(format!("{e:#}")))?;
        if !quiet {
            eprintln!(
                "update {:>5}  episodes {:>6}  mean_return {:>12.3}  value_loss {:>10.4}  kl {:.5}",
                m.update, m.episodes, m.mean_return, m.value_loss, m.approx_kl
            );
        }
        Ok(())
    })?;
    let final_path = out_dir.join("final_checkpoint.json");
    final_ck.save(&final_path)?;
    Ok(TrainOutcome { out_dir, metrics: metrics_path, final_checkpoint: final_path, updates: final_ck.updates })
}

fn write_outputs<C: Controller + ?Sized>(
    env: &mut SpinEnv,
    controller: &mut C,
    episodes: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<EvalSummary> {
    let traj_dir = out_dir.join("trajectories");
    create_dir(&traj_dir)?;
    let summary = evaluate(env, controller, episodes, seed, |i, rows| {
        write_trajectory_csv(traj_dir.join(format!("episode_{i:03}.csv")), rows)
    })?;
    let path = out_dir.join("summary.json");
    let mut f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(summary)
}

fn eval_setup(config: &Path, seed: Option<u64>, episodes: Option<usize>) -> Result<(Experiment, PathBuf, usize)> {
    let loaded = load_experiment(config)?;
    let mut exp = loaded.experiment;
    if let Some(s) = seed {
        exp.set_seed(s);
    }
    let episodes = episodes.unwrap_or(exp.eval_episodes);
    if episodes == 0 {
        bail!("--episodes must be >= 1");
    }
    Ok((exp, loaded.out_dir, episodes))
}

pub fn eval(opts: &EvalOptions) -> Result<EvalSummary> {
    let (exp, default_out, episodes) = eval_setup(&opts.config, opts.seed, opts.episodes)?;
    let ck = Checkpoint::load(&opts.checkpoint).with_context(|| format!("loading {}", opts.checkpoint.display()))?;
    let mut controller = PpoController::new(ck.agent, opts.deterministic, exp.seed)?;
    let out_dir = opts.out.clone().unwrap_or_else(|| default_out.join("eval"));
    create_dir(&out_dir)?;
    let mut manifest = Manifest::new("eval", &exp)?;
    manifest.deterministic = Some(opts.deterministic);
    manifest.write(&out_dir.join("manifest.json"))?;
    let mut env = exp.env()?;
    write_outputs(&mut env, &mut controller, episodes, exp.seed, &out_dir)
}

pub fn baseline(opts: &BaselineOptions) -> Result<EvalSummary> {
    let (exp, default_out, episodes) = eval_setup(&opts.config, opts.seed, opts.episodes)?;
    let kind = match opts.kind.as_deref() {
        None => exp.baseline,
        Some("neutral") => BaselineConfig::Neutral,
        Some("pare") => match exp.baseline {
            p @ BaselineConfig::Pare { .. } => p,
            BaselineConfig::Neutral => BaselineConfig::pare(),
        },
        Some(other) => bail!("unknown baseline kind {other:?} (expected neutral or pare)"),
    };
    let mut controller = BaselineController::new(kind, exp.scenario.limits)?;
    let out_dir = opts.out.clone().unwrap_or_else(|| default_out.join(format!("baseline_{}", kind.name())));
    create_dir(&out_dir)?;
    Manifest::new("baseline", &exp)?.write(&out_dir.join("manifest.json"))?;
    let mut env = exp.env_with(kind.scenario(&exp.scenario))?;
    write_outputs(&mut env, &mut controller, episodes, exp.seed, &out_dir)
}

/// Load and cross-check everything; return the effective config as pretty JSON.
pub fn validate(config: &Path) -> Result<String> {
    let loaded = load_experiment(config)?;
    let exp = &loaded.experiment;
    let mut dump = serde_json::to_value(exp)?;
    dump["config_sha256"] = sha256_hex(exp.canonical_json()?.as_bytes()).into();
    dump["notes"] = exp.limit_notes().into();
    Ok(serde_json::to_string_pretty(&dump)?)
}
