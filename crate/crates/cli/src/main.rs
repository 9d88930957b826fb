//! `pidlab`: partial information decompositions from the command line.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 solver
//! failure, 5 verification failure.

mod commands;
mod distfile;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ComputeArgs, ConstructionArgs};
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "pidlab", version, about = "Bivariate partial information decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose I(target; sources) with one or more measures.
    Compute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "S")]
        target: String,
        #[arg(long, value_delimiter = ',', default_value = "Y,Z")]
        sources: Vec<String>,
        /// Comma-separated measure names, or `all`.
        #[arg(long, default_value = "all")]
        measures: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a member of a built-in family as a distribution file.
    Family {
        #[arg(long)]
        name: String,
        /// Family parameter as key=value; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded verification suite.
    Verify {
        /// consistency, additivity, iid, continuity, locking, mmi-bound or oracle.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decomposition built from given unique-information candidates.
    UiConstruction {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "S")]
        target: String,
        #[arg(long, value_delimiter = ',', default_value = "Y,Z")]
        sources: Vec<String>,
        #[arg(long, allow_negative_numbers = true)]
        delta_y: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta_z: f64,
        /// Names the origin of the deltas in the report.
        #[arg(long, default_value = "cli")]
        tag: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = commands::solver_config()?;
    match cli.command {
        Command::Compute {
            input,
            target,
            sources,
            measures,
            out,
        } => commands::compute(
            &ComputeArgs {
                input: &input,
                target: &target,
                sources: &sources,
                measures: &measures,
                out: out.as_deref(),
            },
            &cfg,
        ),
        Command::Family { name, params, out } => {
            commands::family(&name, &params, out.as_deref())
        }
        Command::Verify {
            suite,
            trials,
            seed,
            out,
        } => commands::verify(&suite, trials, seed, out.as_deref(), &cfg),
        Command::UiConstruction {
            input,
            target,
            sources,
            delta_y,
            delta_z,
            tag,
            out,
        } => commands::construction(
            &ConstructionArgs {
                input: &input,
                target: &target,
                sources: &sources,
                delta_y,
                delta_z,
                tag: &tag,
                out: out.as_deref(),
            },
            &cfg,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pidlab: {e}");
            if let CliError::Solver {
                report: Some(r), ..
            } = &e
            {
                eprintln!("{}", serde_json::to_string_pretty(r).expect("reports serialize"));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
