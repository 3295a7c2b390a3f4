//! `liit` — score tabular data with the LAD rate function, train classifiers
//! iteratively on sampled subsets, and benchmark against full-data training.
//!
//! Configuration comes from one JSON document; command-line flags override
//! it. Progress goes to standard error, data only to files. Exit codes:
//! 0 success, 1 configuration error, 2 runtime failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::RegimeArg;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "liit", version, about = "LAD-scored iterative training pipeline")]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long, global = true, default_value = "liit.json")]
    config: PathBuf,

    /// Override the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write per-row anomaly scores (CSV) for every configured dataset.
    Score,
    /// Train one regime per configured dataset; write model + trace JSON.
    Train {
        /// Training regime: the full-data baseline or a sampling strategy.
        #[arg(long, value_enum)]
        strategy: RegimeArg,
    },
    /// Run the benchmark grid; write report JSON and the AUC table CSV.
    Bench {
        /// Override the rerun count from the config.
        #[arg(long)]
        reruns: Option<usize>,
        /// Override the worker count from the config (1 = timing-faithful).
        #[arg(long)]
        parallelism: Option<usize>,
    },
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Command::Bench {
        reruns,
        parallelism,
    } = &cli.command
    {
        if let Some(r) = reruns {
            cfg.reruns = *r;
        }
        if let Some(p) = parallelism {
            cfg.parallelism = *p;
        }
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Score => commands::cmd_score(&cfg),
        Command::Train { strategy } => commands::cmd_train(&cfg, strategy),
        Command::Bench { .. } => commands::cmd_bench(&cfg),
    };

    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
