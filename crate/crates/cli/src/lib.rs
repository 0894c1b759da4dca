//! The `bethe` command-line tool.
//!
//! Exit codes: 0 success, 2 input or I/O error, 3 numerical failure,
//! 4 belief propagation did not converge.

pub mod commands;
pub mod config;
pub mod settings;

use std::ffi::OsString;
use std::fmt;

use clap::{Args, Parser, Subcommand};

pub use settings::Settings;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "bethe", version, about = "Bethe learnability of binary pairwise Markov random fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Belief propagation on a model, with the Bethe log partition estimate.
    Infer(CommonArgs),
    /// Subgradient ascent on the Bethe likelihood of given marginals.
    Learn(CommonArgs),
    /// Learnability verdict for given marginals.
    Classify(CommonArgs),
    /// Classify every interior point of the homogeneous marginal grid.
    Scan(CommonArgs),
    /// Homogeneous parameter search and the free-energy surface at its optimum.
    Figure1(CommonArgs),
}

/// Flags shared by every command. Each may also be set in `--config`; flags
/// win over the file, which wins over defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key = value file mirroring these flags
    #[arg(long, value_name = "PATH")]
    pub config: Option<std::path::PathBuf>,
    /// torus:RxC | cycle:N | chain:N | complete:N | file:PATH
    #[arg(long)]
    pub graph: Option<String>,
    /// Homogeneous marginals
    #[arg(long, value_name = "MU_V,MU_E")]
    pub homogeneous: Option<String>,
    /// Minimal marginals file (mu_node, mu_edge)
    #[arg(long, value_name = "PATH")]
    pub marginals: Option<std::path::PathBuf>,
    /// Model file (graph, theta_node, theta_edge)
    #[arg(long, value_name = "PATH")]
    pub model: Option<std::path::PathBuf>,
    /// Marginal grid resolution [scan: 0.01, figure1: 0.002]
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Random BP restarts on top of the uniform start [20]
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Fraction of the old message kept per update [0.5]
    #[arg(long)]
    pub damping: Option<f64>,
    /// BP convergence threshold [1e-10]
    #[arg(long)]
    pub tol: Option<f64>,
    /// BP iteration cap [10000]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Seed for BP restarts [0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Moment-matching tolerance [0.01]
    #[arg(long)]
    pub match_tol: Option<f64>,
    /// Output path; stdout when absent
    #[arg(long, value_name = "PATH")]
    pub out: Option<std::path::PathBuf>,
    /// Also run exact enumeration (infer)
    #[arg(long)]
    pub exact: bool,
    /// Run empirical learning where no bound decides (scan)
    #[arg(long)]
    pub empirical: bool,
    /// Evaluate every bound at every point instead of stopping at the first
    /// decisive one (scan, classify)
    #[arg(long)]
    pub all_bounds: bool,
    /// Ascent iteration cap [500]
    #[arg(long)]
    pub learn_iter: Option<usize>,
    /// Initial ascent step [0.1]
    #[arg(long)]
    pub step0: Option<f64>,
    /// constant | inv_sqrt [inv_sqrt]
    #[arg(long)]
    pub schedule: Option<String>,
    /// Parameter grid resolution for figure1 [0.01]
    #[arg(long)]
    pub theta_resolution: Option<f64>,
    /// Field range for figure1 [-1,1]
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    pub h_range: Option<String>,
    /// Coupling range for figure1 [0,1.5]
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    pub j_range: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Input,
    Numerical,
    NonConvergence,
}

impl Failure {
    pub fn exit_code(self) -> i32 {
        match self {
            Failure::Input => EXIT_INPUT,
            Failure::Numerical => EXIT_NUMERICAL,
            Failure::NonConvergence => EXIT_NONCONVERGENCE,
        }
    }

    pub fn of(e: &bethe_core::Error) -> Failure {
        use bethe_core::Error as E;
        match e {
            E::Numerical(_) | E::PowerIteration(_) => Failure::Numerical,
            E::NoFixedPoint { .. } => Failure::NonConvergence,
            E::Ascent { source, .. } => Failure::of(source),
            _ => Failure::Input,
        }
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug)]
pub struct CliError {
    pub kind: Failure,
    pub stage: String,
    pub message: String,
}

impl CliError {
    pub fn input(stage: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError {
            kind: Failure::Input,
            stage: stage.into(),
            message: message.to_string(),
        }
    }

    pub fn core(stage: impl Into<String>, e: bethe_core::Error) -> Self {
        CliError {
            kind: Failure::of(&e),
            stage: stage.into(),
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind.exit_code()
        }
    }
}
