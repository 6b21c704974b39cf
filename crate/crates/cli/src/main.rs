//! `helicity-lab`: runs one experiment from a TOML configuration and
//! prints a JSON report.
//!
//! Exit codes: 0 success, 2 invalid configuration or unwritable output,
//! 3 violated mathematical precondition, 4 tolerance exceeded.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;
use report::{value, Report};

#[derive(Debug, Parser)]
#[command(
    name = "helicity-lab",
    version,
    about = "Helicity, Calabi and linking experiments on the 3-torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML, or a JSON report to replay).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the grid size.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Report path; the CSV path for `sweep`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the linking seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Do not print the report to stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Helicity of an exact field, or extended helicity with plugs.
    Helicity,
    /// Flux periods over the coordinate 2-tori.
    Flux,
    /// Calabi invariant of a compactly supported Hamiltonian.
    Calabi,
    /// Insert plugs and report flux and field changes.
    PlugInsert,
    /// Compare the helicity change under insertion with the Calabi invariant.
    GgVerify,
    /// Compare mass flow with the flux pairing.
    MassflowVerify,
    /// Asymptotic-linking estimate of the helicity of a solenoid.
    LinkEstimate,
    /// Repeat a verify command over a list of parameters and write CSV.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Helicity => "helicity",
            Command::Flux => "flux",
            Command::Calabi => "calabi",
            Command::PlugInsert => "plug-insert",
            Command::GgVerify => "gg-verify",
            Command::MassflowVerify => "massflow-verify",
            Command::LinkEstimate => "link-estimate",
            Command::Sweep => "sweep",
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(n) = cli.grid {
        cfg.grid = Some(n);
    }
    if let Some(seed) = cli.seed {
        if let Some(l) = cfg.linking.as_mut() {
            l.params.seed = seed;
        }
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(dir) = cfg.out.as_deref().and_then(|p| p.parent()) {
        if !dir.as_os_str().is_empty() && !dir.is_dir() {
            return Err(CliError::Output {
                path: cfg.out.as_ref().unwrap().display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
            });
        }
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<Option<CliError>, CliError> {
    let name = cli.command.name();
    let cfg = load(cli)?;
    cfg.validate(name)?;
    let start = Instant::now();
    let outcome = commands::run(name, &cfg)?;
    let report = Report {
        command: name.to_string(),
        inputs: value(&cfg),
        results: outcome.results,
        residuals: outcome.residuals,
        tolerances: value(cfg.tolerances),
        wall_clock: start.elapsed().as_secs_f64(),
    };
    if !matches!(cli.command, Command::Sweep) {
        if let Some(path) = &cfg.out {
            report.write(path)?;
        }
    }
    if !cli.quiet {
        print!("{}", report.to_json());
    }
    Ok(outcome.failure.map(CliError::Tolerance))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(e)) | Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
