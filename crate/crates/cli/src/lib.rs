//! Command-line front end: problem files in, trajectories and
//! certificate reports out.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub mod commands;
pub mod output;
pub mod problem;

pub use commands::{props, solve, tol_scale_from_env, verify, Outcome, TOL_SCALE_VAR};
pub use output::{Report, ReportLine};
pub use problem::{parse_problem, parse_problem_str, CheckName, ParseError, ProblemSpec, Violation};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Env(String),
    #[error(transparent)]
    Core(#[from] rfde_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for a numerical failure of the scheme, 2 for everything the user must fix.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(rfde_core::Error::PicardDivergence { .. }) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rfde", version, about = "Mild solutions of linear RFDEs with BV kernels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem; writes trajectory.csv and forcing.csv.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve and certify; writes report.json.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, hide = true)]
        inject_corruption: bool,
    },
    /// Randomized Riemann–Stieltjes property suites; writes report.json.
    Props {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Solve { spec, out } => solve(&parse_problem(spec)?, out),
        Command::Verify {
            spec,
            out,
            inject_corruption,
        } => {
            let scale = tol_scale_from_env()?;
            verify(&parse_problem(spec)?, out, scale, *inject_corruption)
        }
        Command::Props { seed, trials, out } => {
            let scale = tol_scale_from_env()?;
            props(*seed, *trials, out, scale)
        }
    }
}
