//! Command-line runner for seeded QAOA thermal-structure experiments.
//!
//! Every subcommand reads an optional JSON config plus flag overrides, runs
//! a batch of instances, and writes machine-readable outputs (JSON records,
//! RFC-4180 CSVs) documented in docs/output_schema.json. Exit codes: 0 on
//! success, 2 on a config error, 3 when a size cap is exceeded.

mod config;
mod experiment;
mod figures;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Analysis, AnglePolicy, ConfigError, Overrides};
use experiment::{run_experiment, RunOptions};
use figures::{FigureKind, Profile};

#[derive(Parser)]
#[command(
    name = "qaoatherm",
    version,
    about = "Seeded experiments on the thermal structure of single-layer QAOA distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample instances and write them as JSON, running no analyses.
    Generate(Overrides),
    /// Simulate at the resolved angles and record state summaries.
    Simulate(Overrides),
    /// Search the angle grid and tabulate the optimum per instance.
    Optimize(Overrides),
    /// Joint energy-Hamming moments and the covariance-slope fit.
    Structure(Overrides),
    /// Mahalanobis Q-Q agreement with the bivariate normal model.
    Normality(Overrides),
    /// Fit the inverse temperature of each sampled distribution.
    Thermal(Overrides),
    /// Sweep gamma below the base angle and track the fitted temperature.
    Scan(Overrides),
    /// Metropolis baseline at the fitted temperature (implies thermal).
    Mcmc(Overrides),
    /// Emit plot-ready figure data.
    Figure {
        #[command(flatten)]
        overrides: Overrides,
        /// Which data set to emit.
        #[arg(long, value_enum)]
        kind: FigureKind,
        /// Batch preset for fig4 (quick: n=12 x 100, full: n=14 x 1000).
        #[arg(long, value_enum)]
        profile: Option<Profile>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(o) => {
            let cfg = config::load(&o)?;
            run_experiment(&cfg, &[], RunOptions { write_instances: true, emit_optimize_csv: false })
        }
        Command::Simulate(o) => {
            let cfg = config::load(&o)?;
            run_experiment(&cfg, &[Analysis::Simulate], RunOptions::default())
        }
        Command::Optimize(o) => {
            let cfg = config::load(&o)?;
            // An explicit angle list has nothing to optimize; grid policies
            // already describe a search and are honored as given.
            if matches!(cfg.angle_policy, AnglePolicy::Explicit(_)) {
                return Err(ConfigError(
                    "angle_policy: optimize subcommand needs a search policy, not explicit angles"
                        .into(),
                )
                .into());
            }
            run_experiment(&cfg, &[], RunOptions { write_instances: false, emit_optimize_csv: true })
        }
        Command::Structure(o) => {
            let cfg = config::load(&o)?;
            run_experiment(&cfg, &[Analysis::Structure], RunOptions::default())
        }
        Command::Normality(o) => {
            let cfg = config::load(&o)?;
            run_experiment(&cfg, &[Analysis::Normality], RunOptions::default())
        }
        Command::Thermal(o) => {
            let cfg = config::load(&o)?;
            run_experiment(&cfg, &[Analysis::Thermal], RunOptions::default())
        }
        Command::Scan(o) => {
            let cfg = config::load(&o)?;
            run_experiment(&cfg, &[Analysis::Scan], RunOptions::default())
        }
        Command::Mcmc(o) => {
            let cfg = config::load(&o)?;
            run_experiment(&cfg, &[Analysis::Mcmc], RunOptions::default())
        }
        Command::Figure { overrides, kind, profile } => {
            let cfg = config::load(&overrides)?;
            figures::emit(kind, &cfg, profile)
        }
    }
}

fn exit_code_for(error: &anyhow::Error) -> ExitCode {
    if error.is::<ConfigError>() {
        return ExitCode::from(2);
    }
    if let Some(core) = error.downcast_ref::<qaoatherm_core::Error>() {
        if matches!(core, qaoatherm_core::Error::SizeLimit { .. }) {
            return ExitCode::from(3);
        }
    }
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            exit_code_for(&error)
        }
    }
}
