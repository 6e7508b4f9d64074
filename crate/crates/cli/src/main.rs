use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use qnoise::harness::{
    aggregate, run_single, run_sweep, sweep_importance, RunConfig, RunStatus, SweepConfig, SweepSummary, WORKERS_ENV,
};

/// Noisy qGAN training and sweep driver.
#[derive(Parser)]
#[command(name = "qnoise", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train once from a run config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every grid point of a sweep config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Parallel runs; defaults to the number of CPUs.
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// Summarize a sweep directory into a JSON file.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print hyperparameter importance for an aggregated summary.
    Importance {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Print a run or sweep config populated with defaults.
    Template {
        #[arg(long, default_value = "run")]
        kind: TemplateKind,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TemplateKind {
    Run,
    Sweep,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train { config, out } => {
            let cfg = RunConfig::read_file(&config)?;
            let report = run_single(&cfg, &out)?;
            match report.status {
                RunStatus::Completed => {
                    println!("final_kl {:.6e}", report.final_kl.unwrap_or(f64::NAN));
                    Ok(ExitCode::SUCCESS)
                }
                status => {
                    eprintln!("run {status} after {} epochs", report.epochs_completed);
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Sweep { config, out, workers } => {
            let sweep = SweepConfig::read_file(&config)?;
            let workers = workers.unwrap_or_else(qnoise::harness::default_workers);
            let entries = run_sweep(&sweep, &out, workers)?;
            let bad = entries.iter().filter(|e| e.status != RunStatus::Completed).count();
            println!("{} runs, {} not completed", entries.len(), bad);
            Ok(ExitCode::SUCCESS)
        }
        Command::Aggregate { input, out } => {
            let summary = aggregate(&input)?;
            summary.write_file(&out)?;
            for g in &summary.groups {
                let best = summary.point(g.best).context("best point missing")?;
                println!(
                    "p={} gate={} mitigation={} k_d={}: best #{} mean {:.4e} std {:.4e}",
                    g.p,
                    g.gate_lambda,
                    g.mitigation,
                    g.k_d,
                    g.best,
                    best.mean_final_kl.unwrap_or(f64::NAN),
                    best.std_final_kl.unwrap_or(f64::NAN)
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Importance { input } => {
            let summary = SweepSummary::read_file(&input)?;
            let report = sweep_importance(&summary)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Template { kind } => {
            match kind {
                TemplateKind::Run => print!("{}", RunConfig::default().to_toml_string()),
                TemplateKind::Sweep => print!("{}", SweepConfig::default().to_toml_string()),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
