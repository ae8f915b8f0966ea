use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinrl_cli::{BaselineOptions, EvalOptions, TrainOptions};

#[derive(Parser)]
#[command(name = "spinrl", version, about = "Spin-recovery simulator and PPO trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy; writes manifest.json, metrics.csv and checkpoints.
    Train {
        /// Experiment file or a previous run's manifest.json.
        #[arg(long)]
        config: PathBuf,
        /// Continue training from this checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Override the total episode budget.
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress per-update progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Roll out a trained policy; writes trajectory CSVs and summary.json.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the mean action instead of sampling.
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Roll out a scripted controller with the same outputs as eval.
    Baseline {
        #[arg(long)]
        config: PathBuf,
        /// neutral or pare (default: the experiment's baseline section).
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load and cross-check all config files, then print the effective config.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { config, checkpoint, episodes, seed, out, quiet } => {
            let outcome = spinrl_cli::train(&TrainOptions { config, checkpoint, episodes, seed, out, quiet })?;
            println!(
                "{} updates; metrics {}; checkpoint {}",
                outcome.updates,
                outcome.metrics.display(),
                outcome.final_checkpoint.display()
            );
        }
        Command::Eval { config, checkpoint, episodes, seed, deterministic, out } => {
            let s = spinrl_cli::eval(&EvalOptions { config, checkpoint, episodes, seed, deterministic, out })?;
            print_summary(&s);
        }
        Command::Baseline { config, kind, episodes, seed, out } => {
            let s = spinrl_cli::baseline(&BaselineOptions { config, kind, episodes, seed, out })?;
            print_summary(&s);
        }
        Command::Validate { config } => {
            println!("{}", spinrl_cli::validate(&config)?);
        }
    }
    Ok(())
}

fn print_summary(s: &spinrl::eval::EvalSummary) {
    let arrest = s.rate_arrest_time_s.map_or("none".to_string(), |t| format!("{t:.2} s"));
    println!(
        "{} episodes: mean return {:.1}, rate arrest {} ({:.0}% of episodes), final |e_alpha| {:.4} rad, altitude loss {:.0} ft",
        s.episodes.len(),
        s.mean_return,
        arrest,
        100.0 * s.arrested_fraction,
        s.final_abs_e_alpha_rad,
        s.altitude_loss_ft
    );
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
