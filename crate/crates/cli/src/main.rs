//! `chainstab` command line: simulations, certificate sweeps, stability
//! suites and figure reproduction for the built-in scenarios.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::ScenarioConfig;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(String),
    #[error("finite escape at t = {0}")]
    Escape(f64),
    #[error("runtime termination: {0}")]
    Runtime(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io(_) => 1,
            Failure::Escape(_) | Failure::Runtime(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "chainstab", version, about = "Sampled-data set-chain feedback toolkit")]
struct Cli {
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "CHAINSTAB_WORKERS")]
    workers: Option<usize>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the closed loop and write the trajectory CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the certification checks selected in the config.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo stability suite.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Jet-engine figure run 1, 2 or 3 as CSV.
    ReproduceFigure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        index: u8,
        /// Starts from this config instead of the built-in figure setup.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Writes the effective configuration here.
        #[arg(long)]
        emit_config: Option<PathBuf>,
    },
    /// Built-in scenario labels.
    ListScenarios,
}

fn load(path: &std::path::Path, seed: Option<u64>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.override_seed(s);
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--workers: {e}")))?;
    }
    match cli.command {
        Command::Simulate { config, out } => {
            commands::simulate(&load(&config, cli.seed)?, out.as_deref())
        }
        Command::Certify { config, out } => {
            commands::certify(&load(&config, cli.seed)?, out.as_deref())
        }
        Command::Suite { config, out } => {
            commands::suite(&load(&config, cli.seed)?, out.as_deref())
        }
        Command::ReproduceFigure {
            index,
            config,
            out,
            emit_config,
        } => {
            let cfg = match config {
                Some(p) => load(&p, cli.seed)?,
                None => {
                    let mut c = config::figure_config(index as usize, 0.001)?;
                    if let Some(s) = cli.seed {
                        c.override_seed(s);
                    }
                    c
                }
            };
            if !matches!(cfg.system, config::SystemSpec::JetEngine { .. }) {
                return Err(Failure::Config("figures use the jet engine system".into()));
            }
            if let Some(p) = emit_config {
                std::fs::write(&p, cfg.to_pretty()).map_err(|e| Failure::Io(e.to_string()))?;
            }
            let s = commands::reproduce_figure(&cfg, index as usize, out.as_deref())?;
            eprintln!(
                "figure {}: simulated h = {}, certified h~ = {:e} (bound {:e}), theta entry t = {}",
                s.figure,
                s.simulated_period,
                s.certified_period,
                s.certified_bound,
                s.theta_entry.map_or("none".into(), |t| t.to_string()),
            );
            Ok(())
        }
        Command::ListScenarios => {
            print!("{}", commands::list_scenarios());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("chainstab: {f}");
            ExitCode::from(f.code())
        }
    }
}
