//! Command-line front end for the dickelab numerical core.

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dickelab_core::dynamics::evolve;
use dickelab_core::energetics::evaluate;
use dickelab_core::scaling::{run_sweep, SweepSummary};

use config::{apply_overrides, parse, read_value, CommandKind, Format, RunConfig, Section, Violation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dickelab", version, about = "Dicke-family Hamiltonian lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one state and record observables.
    Evolve(RunArgs),
    /// Run one evolution per N and fit a power law to a metric.
    Sweep(RunArgs),
    /// Evaluate one closed-form energetics formula.
    Energetics(RunArgs),
    /// Check a config without running it.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override a config entry, e.g. `--set model.g=0.05`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub overrides: Vec<String>,
}

/// Failure of one CLI invocation, mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config:\n{}", list(.0))]
    Config(Vec<Violation>),
    #[error("numerical failure: {0}")]
    Numerical(dickelab_core::Error),
    #[error("{0}")]
    Core(dickelab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Core(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<dickelab_core::Error> for CliError {
    fn from(e: dickelab_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Core(e)
        }
    }
}

/// Loads, overrides and validates a config.
pub fn load(path: &std::path::Path, overrides: &[String], expected: Option<CommandKind>) -> Result<RunConfig, CliError> {
    let mut value = read_value(path).map_err(|v| CliError::Config(vec![v]))?;
    apply_overrides(&mut value, overrides).map_err(|v| CliError::Config(vec![v]))?;
    parse(value, expected).map_err(CliError::Config)
}

/// Runs a validated config and returns the rendered output bytes.
pub fn execute(cfg: &RunConfig, format: Option<Format>) -> Result<Vec<u8>, CliError> {
    let bytes = match &cfg.section {
        Section::Evolve(req) => {
            let tr = evolve(req)?;
            output::render_trajectory(&tr, format.unwrap_or(Format::Csv))?
        }
        Section::Sweep(req) => {
            let fit = run_sweep(req)?;
            output::render_sweep(&SweepSummary::new(req, &fit), format.unwrap_or(Format::Csv))?
        }
        Section::Energetics(calc) => {
            let c = evaluate(calc)?;
            output::render_calculation(&c, format.unwrap_or(Format::Json))?
        }
    };
    Ok(bytes)
}

fn run_command(kind: CommandKind, args: &RunArgs) -> Result<(), CliError> {
    let cfg = load(&args.config, &args.overrides, Some(kind))?;
    let format = args.format.or(cfg.output.format);
    let bytes = execute(&cfg, format)?;
    let path = args.output.as_deref().or(cfg.output.path.as_deref());
    output::emit(&bytes, path)?;
    Ok(())
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Evolve(a) => run_command(CommandKind::Evolve, a),
        Command::Sweep(a) => run_command(CommandKind::Sweep, a),
        Command::Energetics(a) => run_command(CommandKind::Energetics, a),
        Command::Validate(a) => {
            let cfg = load(&a.config, &a.overrides, None)?;
            println!("ok: {} config is valid", cfg.command.as_str());
            Ok(())
        }
    }
}

/// Sizes the global thread pool from `DICKELAB_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DICKELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Config(vec![Violation {
            path: "DICKELAB_THREADS".into(),
            message: format!("expected a positive integer, got `{raw}`"),
        }])
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}
