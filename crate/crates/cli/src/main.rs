//! `bimonetary`: runs the modeling pipeline and writes plot-ready CSV/JSON.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 numerical failure.
//! Failures print one JSON line `{"error": {stage, kind, code, message}}` on
//! standard error.

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{resolve_stages, Stage};
use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "bimonetary", version, about = "Categorical macroeconometric model of a peso/dollar economy")]
struct Cli {
    /// Input panel CSV (`Date` plus one column per variable).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for synthetic panels and randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Pipeline stages, comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    stages: Vec<Stage>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an input CSV against the schema.
    Validate,
    /// Stationarity, Johansen, Granger, VAR, Ljung-Box, then optional stages.
    Pipeline,
    /// Scenario comparisons (baseline vs shocked fitted values).
    Scenario {
        /// Scenario JSON file; defaults to the built-in three scenarios.
        #[arg(long)]
        scenarios: Option<PathBuf>,
    },
    /// Penalty-minimizing equilibrium exchange rate per row.
    Equilibrium,
    /// Aggregate devaluation-expectation index and its validation.
    Colimit,
    /// Least-squares calibration of the structural equations.
    Calibrate,
    /// Evaluate the structural equations on the input.
    Simulate,
    /// Commutativity and functor-law checks.
    FunctorCheck,
    /// Write a seeded synthetic canonical panel.
    Synth {
        #[arg(long, default_value_t = 1000)]
        rows: usize,
    },
}

fn config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.input.is_some() {
        cfg.input = cli.input.clone();
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Command::Scenario { scenarios: Some(p) } = &cli.command {
        cfg.scenario_file = Some(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Validate => commands::cmd_validate(&cfg).map(drop),
        Command::Pipeline => commands::cmd_pipeline("pipeline", &cfg, &resolve_stages(&cli.stages)),
        Command::Scenario { .. } => commands::cmd_pipeline("scenario", &cfg, &[Stage::Sensitivity]),
        Command::Equilibrium => commands::cmd_pipeline("equilibrium", &cfg, &[Stage::Equilibrium]),
        Command::Colimit => commands::cmd_pipeline("colimit", &cfg, &[Stage::Colimit]),
        Command::Calibrate => commands::cmd_calibrate(&cfg),
        Command::Simulate => commands::cmd_simulate(&cfg),
        Command::FunctorCheck => {
            if commands::cmd_functor_check(&cfg)? {
                Ok(())
            } else {
                Err(CliError::input("functor_check", "CheckFailed", "diagram or functor laws do not hold"))
            }
        }
        Command::Synth { rows } => commands::cmd_synth(&cfg, *rows),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_line());
            ExitCode::from(e.code)
        }
    }
}
