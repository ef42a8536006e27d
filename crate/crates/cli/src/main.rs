//! `plantlab`: run ldlr sweeps, pseudo-calibration checks, the duality lab,
//! robustness estimates, moment-matrix checks, or raw sampling from a flat
//! config.
//!
//! Exit codes: 0 success, 1 malformed config or other error, 2 guard
//! violation (space too large), 3 solver non-convergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use output::OutDir;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(plantlab::Error),
    Io(std::io::Error),
}

impl From<plantlab::Error> for CliError {
    fn from(e: plantlab::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_guard() => 2,
            CliError::Core(plantlab::Error::NonConvergence { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "plantlab", version, about = "Planted-problem numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; may also be given as `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Parameter override `key=value`, repeatable.
    #[arg(short = 'p', long = "param", global = true)]
    params: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Grid of ‖μ̂^{≤d} − 1‖² over n × λ × d.
    LdlrSweep,
    /// PSD, scalar and residual checks of pseudo-calibrated matrices on null samples.
    PseudocalCheck,
    /// Moment-matching program and its low-degree dual on an enumerable toy.
    DualityLab,
    /// Monte Carlo robust-inference failure rates.
    RobustCheck,
    /// Spectra of solution moment matrices.
    MomentsCheck,
    /// Emit raw null or planted instances.
    Sample,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::LdlrSweep => "ldlr-sweep",
            Command::PseudocalCheck => "pseudocal-check",
            Command::DualityLab => "duality-lab",
            Command::RobustCheck => "robust-check",
            Command::MomentsCheck => "moments-check",
            Command::Sample => "sample",
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = Config::load(cli.config.as_deref(), &cli.params)?;
    let seed = match (cli.seed, cfg.u64("seed")?) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => return Err(CliError::Config("a master seed is required (--seed or `seed`)".into())),
    };
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let mut ctx = commands::Ctx {
        cfg: &cfg,
        seed,
        hash: cfg.hash(cli.command.name(), seed),
        out: OutDir::new(&cli.out)?,
    };
    match cli.command {
        Command::LdlrSweep => commands::ldlr_sweep(&mut ctx)?,
        Command::PseudocalCheck => commands::pseudocal_check(&mut ctx)?,
        Command::DualityLab => commands::duality_lab(&mut ctx)?,
        Command::RobustCheck => commands::robust_check(&mut ctx)?,
        Command::MomentsCheck => commands::moments_check(&mut ctx)?,
        Command::Sample => commands::sample(&mut ctx)?,
    }
    Ok(ctx.out.written)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("plantlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
