use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{execute, Command, ProbeName};
use crate::config::{defaulted_keys, parse_config, RunConfig};
use crate::error::{LabError, Result};
use crate::manifest::RunStatus;

#[derive(Debug, Parser)]
#[command(name = "gzk-lab", version, about = "ZK / modified ZK simulations, radius tracking and estimate probes")]
pub struct Cli {
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Reuse a non-empty output directory.
    #[arg(long, global = true)]
    pub force: bool,
    /// Overrides the run seed and the probe seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Evolve the configured data and write diagnostics and checkpoints.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Track the fitted radius against the ledger and reference curves.
    RadiusTrack {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run one probe suite.
    Probe {
        #[arg(value_enum)]
        name: ProbeName,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Repeat `simulate` over values of one scalar key.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dotted key, e.g. `integrator.dt`.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
}

fn load(path: Option<&PathBuf>, seed: Option<u64>) -> Result<RunConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| LabError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    for (k, v) in defaulted_keys(&text, &cfg)? {
        log::info!("default: {k} = {v}");
    }
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.probes.seed = s;
    }
    Ok(cfg)
}

/// Parses arguments, runs, and maps the outcome to an exit code:
/// 0 when every hard assertion held, 1 on a failed run or assertion, 2 on usage or config errors.
pub fn run(cli: Cli) -> ExitCode {
    let (cmd, config) = match &cli.cmd {
        Cmd::Simulate { config } => (Command::Simulate, config),
        Cmd::RadiusTrack { config } => (Command::RadiusTrack, config),
        Cmd::Probe { name, config } => (Command::Probe(*name), config),
        Cmd::Sweep { config, axis, values } => (Command::Sweep { axis: axis.clone(), values: values.clone() }, config),
    };
    let cfg = match load(config.as_ref(), cli.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let root = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    match execute(&cmd, &cfg, &root, cli.force) {
        Ok(m) => {
            for line in &m.summary {
                println!("{line}");
            }
            println!("manifest: {}", root.join(crate::manifest::MANIFEST_NAME).display());
            if m.status == RunStatus::Completed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ (LabError::Usage(_) | LabError::OutputExists(_) | LabError::Config(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
