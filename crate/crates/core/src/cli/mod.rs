//! Command-line entry points: `analyze`, `simulate` and `sweep`.
//!
//! Exit codes: 0 on success, 1 when a run fails at runtime (for example an
//! output file cannot be written), 2 when the input is invalid.

mod analyze;
pub mod locate;
pub mod scenario;
mod simulate;
mod sweep;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use analyze::{analyze, AnalyzeRecord};
pub use scenario::ScenarioFile;
pub use simulate::{simulate, SimSummary};
pub use sweep::{expand_params, sweep, sweep_rows, AxisArg, SweepRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub(crate) fn context(self, what: &str) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
            CliError::Runtime(m) => CliError::Runtime(format!("{what}: {m}")),
        }
    }
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "macgame", version, about = "Equilibria and simulation of 802.11 MAC contention")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: the scenario's output.dir, else out/<name>).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Payoff matrix, pure Nash equilibria and their classification.
    Analyze { file: PathBuf },
    /// Run the simulator; writes intervals.csv and summary.json.
    Simulate { file: PathBuf },
    /// Evaluate the scenario over a grid of one or two parameters.
    Sweep {
        file: PathBuf,
        /// Dotted path of a scalar field, e.g. nodes.i.distance_m. `*`
        /// matches every node or key. Repeat for a second axis.
        #[arg(long)]
        param: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        from: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Vec<f64>,
        #[arg(long)]
        steps: Vec<usize>,
    },
}

/// Loads a scenario and applies the `--seed` override.
pub fn load(path: &Path, seed: Option<u64>) -> Result<(ScenarioFile, String), CliError> {
    let (mut sc, text) = ScenarioFile::load(path)?;
    if let (Some(seed), Some(sim)) = (seed, sc.sim.as_mut()) {
        sim.seed = seed;
    }
    Ok((sc, text))
}

pub fn out_dir(sc: &ScenarioFile, out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => match sc.output.as_ref().and_then(|o| o.dir.as_ref()) {
            Some(d) => PathBuf::from(d),
            None => PathBuf::from("out").join(&sc.name),
        },
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::Analyze { file } => {
            let (sc, text) = load(&file, cli.seed)?;
            analyze(&sc, Some(&text), &out_dir(&sc, cli.out.as_deref()))
        }
        Command::Simulate { file } => {
            let (sc, text) = load(&file, cli.seed)?;
            simulate(&sc, Some(&text), &out_dir(&sc, cli.out.as_deref()))
        }
        Command::Sweep {
            file,
            param,
            from,
            to,
            steps,
        } => {
            let (sc, text) = load(&file, cli.seed)?;
            let axes = AxisArg::from_flags(&param, &from, &to, &steps)?;
            sweep(&sc, Some(&text), axes, &out_dir(&sc, cli.out.as_deref()))
        }
    }
}

/// Parses arguments, runs the command, reports errors on stderr and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
