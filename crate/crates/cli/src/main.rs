//! `parking` — solve, simulate, and cross-validate the two-line car
//! parking models on a ring.
//!
//! Exit codes: 0 success / all comparisons pass, 1 a comparison failed,
//! 2 configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parking_core::model::ModelVariant;

mod commands;
mod manifest;

use commands::CmdOutcome;

#[derive(Parser)]
#[command(
    name = "parking",
    version,
    about = "Two-line car parking on a ring: density ODEs, exact kinetic Monte Carlo, \
             a small-ring oracle, and cross-route comparison"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the closed density ODE system and report jamming limits
    Ode(OdeArgs),
    /// Simulate the parking process and write replica-averaged densities
    Simulate(SimulateArgs),
    /// Evolve the exact distribution of a small ring and write marginals
    Oracle(OracleArgs),
    /// Compare simulator estimates against a reference; exit 1 on failure
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Noscreening,
    Screening,
}

impl From<ModelArg> for ModelVariant {
    fn from(arg: ModelArg) -> Self {
        match arg {
            ModelArg::Noscreening => ModelVariant::NoScreening,
            ModelArg::Screening => ModelVariant::Screening,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReferenceArg {
    /// Infinite-lattice density ODEs (expect finite-size effects)
    Ode,
    /// Exact distribution on the same small ring
    Oracle,
    /// Closed-form identities of the frozen-site geometry
    ClosedForm,
}

#[derive(Args)]
pub struct OdeArgs {
    /// Model variant
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Integration horizon
    #[arg(long, default_value_t = 30.0)]
    pub t_max: f64,
    /// RK4 step size
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Trajectory CSV path; the JSON summary lands next to it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Model variant
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Ring size
    #[arg(long, default_value_t = 10_000)]
    pub sites: usize,
    /// Simulation horizon
    #[arg(long, default_value_t = 15.0)]
    pub t_max: f64,
    /// Number of independent replicas
    #[arg(long, default_value_t = 100)]
    pub replicas: usize,
    /// Master seed; replica streams derive from it
    #[arg(long, default_value_t = 12345)]
    pub seed: u64,
    /// Comma-separated arrival-free site indices, e.g. "0,2"
    #[arg(long)]
    pub frozen: Option<String>,
    /// Pattern to record, comma-separated site states, e.g. "0,1,0"
    /// (repeat the flag for several patterns)
    #[arg(long = "patterns", value_name = "CODES")]
    pub patterns: Vec<String>,
    /// Samples CSV path; the JSON manifest lands next to it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct OracleArgs {
    /// Model variant
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Ring size, 3..=8
    #[arg(long)]
    pub sites: usize,
    /// Comma-separated nondecreasing sample times, e.g. "0.5,1,2,5"
    #[arg(long)]
    pub times: String,
    /// Pattern whose exact marginal to report (repeatable)
    #[arg(long = "patterns", value_name = "CODES")]
    pub patterns: Vec<String>,
    /// Marginals CSV path; the JSON manifest lands next to it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Reference to compare the simulator against
    #[arg(long, value_enum)]
    pub reference: ReferenceArg,
    /// Model variant; both models run when omitted (where applicable)
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Ring size (default depends on the reference)
    #[arg(long)]
    pub sites: Option<usize>,
    /// Comma-separated sample times (default depends on the reference)
    #[arg(long)]
    pub times: Option<String>,
    /// Number of replicas (default depends on the reference)
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Master seed
    #[arg(long, default_value_t = 12345)]
    pub seed: u64,
    /// Frozen sites for the closed-form reference: "0" or "0,2"
    #[arg(long)]
    pub frozen: Option<String>,
    /// Patterns to compare (oracle reference; ODE knows only "0,1,0")
    #[arg(long = "patterns", value_name = "CODES")]
    pub patterns: Vec<String>,
    /// Pass gate on |z|; an absolute floor of 1e-3 also applies
    #[arg(long, default_value_t = 4.0)]
    pub z_threshold: f64,
    /// JSON report path
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ode(args) => commands::cmd_ode(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Oracle(args) => commands::cmd_oracle(args),
        Command::Compare(args) => commands::cmd_compare(args),
    };
    match result {
        Ok(CmdOutcome::Ok) => ExitCode::SUCCESS,
        Ok(CmdOutcome::ComparisonsFailed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
