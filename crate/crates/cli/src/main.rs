//! `flexflip`: energy and friction fields, fingertip paths and grasp sweeps
//! written as CSV tables with a manifest.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};

use commands::FailureCount;
use config::{config_error, ConfigError};
use output::OutDir;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "flexflip", version, about = "Flex-and-flip grasp analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; every key has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override a config key, e.g. `--set sweep.mu_available=0.4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Unit rod length and rigidity (field subcommands only).
    #[arg(long, global = true)]
    nondimensional: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum flexural energy and its gradient over the reachable half-disk.
    EnergyField,
    /// As energy-field, with the minimum friction coefficient at contact #2.
    FrictionField,
    /// Nominal fingertip paths of finger #2 over the pressure ramp.
    FingerPath {
        /// Hand placement `x,z,theta` (mm, mm, deg); repeatable. Defaults to `path.configs`.
        #[arg(long = "hand", value_name = "X,Z,THETA", allow_hyphen_values = true)]
        hands: Vec<String>,
    },
    /// Classify every lattice placement, then fit the success band.
    Sweep,
    /// Fit report from an existing sweep table.
    Fit {
        /// Sweep table; defaults to `sweep.csv` in the output directory.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::EnergyField => "energy-field",
            Command::FrictionField => "friction-field",
            Command::FingerPath { .. } => "finger-path",
            Command::Sweep => "sweep",
            Command::Fit { .. } => "fit",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(f) if f.fraction() > 0.0 => {
            log::warn!("{} of {} solves failed", f.failed, f.attempted);
            ExitCode::SUCCESS
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else if e.downcast_ref::<FailureRate>().is_some() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}

#[derive(Debug)]
struct FailureRate(FailureCount, f64);

impl std::fmt::Display for FailureRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} of {} solves failed, above the allowed fraction {}; outputs were still written",
            self.0.failed, self.0.attempted, self.1
        )
    }
}

impl std::error::Error for FailureRate {}

fn run(cli: &Cli) -> anyhow::Result<FailureCount> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    let field_command = matches!(cli.command, Command::EnergyField | Command::FrictionField);
    if cli.nondimensional {
        if !field_command {
            return Err(config_error(anyhow!("--nondimensional applies to energy-field and friction-field only")));
        }
        cfg.nondimensionalize();
        cfg.validate().map_err(config_error)?;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    let pool = match cli.threads {
        Some(0) => return Err(config_error(anyhow!("--threads must be at least 1"))),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?,
        None => rayon::ThreadPoolBuilder::new().build()?,
    };
    let root = PathBuf::from(&cfg.output.dir);
    let mut out = OutDir::create(&root)?;
    let failures = pool.install(|| match &cli.command {
        Command::EnergyField => commands::field(&cfg, &mut out, false),
        Command::FrictionField => commands::field(&cfg, &mut out, true),
        Command::FingerPath { hands } => {
            let hands = if hands.is_empty() {
                cfg.path.configs.clone()
            } else {
                hands.iter().map(|h| commands::parse_hand(h)).collect::<anyhow::Result<_>>().map_err(config_error)?
            };
            commands::finger_paths(&cfg, &hands, &mut out)
        }
        Command::Sweep => commands::run_sweep(&cfg, &mut out),
        Command::Fit { input } => {
            let input = input.clone().unwrap_or_else(|| root.join("sweep.csv"));
            commands::fit_from_csv(&cfg, &input, &mut out)
        }
    })?;
    let manifest = out.finish(cli.command.name(), &cfg, cli.nondimensional)?;
    log::info!("manifest {}", manifest.display());
    if failures.fraction() > cfg.solver.max_failure_fraction {
        return Err(FailureRate(failures, cfg.solver.max_failure_fraction).into());
    }
    Ok(failures)
}
