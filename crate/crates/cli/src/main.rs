//! `birthcut` command-line front end.
//!
//! Every subcommand works in the extended type [`birthcut::Hp`] and writes
//! either a `key = value` block or a CSV table (header row, `.` decimal
//! point) to `--out` or standard output.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or I/O error,
//! 3 numerical failure.

mod commands;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Precision carried by the extended type, in bits.
pub const HP_BITS: u32 = 132;

#[derive(Parser, Debug)]
#[command(
    name = "birthcut",
    version,
    about = "Birth-of-a-cut numerics: critical potentials, equilibrium measures, finite-N oracle and mean-field asymptotics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Options shared by all subcommands.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Critical spec file (`key = value` lines). Without it the spec is
    /// built from `--nu` and `--phi-e` with the minimal-degree `Q`.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub nu: u32,
    #[arg(
        long = "phi-e",
        global = true,
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub phi_e: f64,
    /// Comma-separated list of N values.
    #[arg(long = "N", global = true, value_delimiter = ',')]
    pub n_list: Vec<f64>,
    /// Scaling-variable grid `A:B:STEP` (both ends included).
    #[arg(long = "u-grid", global = true)]
    pub u_grid: Option<String>,
    /// Comma-separated `t/T_c` values, or a range `A:B:STEP`.
    #[arg(long = "t-grid", global = true, allow_hyphen_values = true)]
    pub t_grid: Option<String>,
    /// Requested working precision in bits (at least 128).
    #[arg(long, global = true, default_value_t = 320)]
    pub bits: u32,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check every condition of a critical potential.
    Validate,
    /// Solve equilibrium measures at `T = T_c(1 + t)` over `--t-grid`.
    Equilibrium,
    /// Print the critical spec and its derived constants.
    Critical,
    /// Export recurrence tables: the finite-N oracle for each `--N`, or the
    /// effective model chain with `--model`.
    Chain {
        #[arg(long)]
        model: bool,
        #[arg(long = "k-max", default_value_t = 30)]
        k_max: usize,
    },
    /// Oracle versus mean-field `γ`, `β` over a grid of the scaling variable.
    ScanU,
    /// Wavefunctions and kernel near the well at one `(N, u)`.
    Psi {
        /// Grid of the local coordinate `y`, `A:B:STEP`.
        #[arg(
            long = "y-grid",
            default_value = "-3:3:0.5",
            allow_hyphen_values = true
        )]
        y_grid: String,
    },
    /// Second derivative of the free energy across the transition.
    Transition,
    /// Large-u comparison of the mean-field recurrence with the two-cut bounds.
    Compare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
