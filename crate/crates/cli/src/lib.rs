//! Command-line front end for `depbound`: evaluate bounds, run verification
//! suites, simulate the dependence models and compare bounds side by side.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 some bound invalid, 3 a
//! soundness violation, 64 usage error.

mod bound;
mod compare;
pub mod output;
mod simulate;
mod verify;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub use output::{Format, Record, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Failure(String),
}

impl From<depbound::Error> for CliError {
    fn from(e: depbound::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Records to print and the exit code they imply.
pub(crate) struct Report {
    records: Vec<Record>,
    code: i32,
}

#[derive(Parser, Debug)]
#[command(name = "depbound", version, about = "Tail bounds for sums of weakly dependent [0,1]-valued variables")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses one per core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one bound over a grid of parameters.
    Bound(bound::BoundArgs),
    /// Run a verification suite.
    Verify(verify::VerifyArgs),
    /// Estimate a tail probability by simulation.
    Simulate(simulate::SimulateArgs),
    /// Tabulate several bounds over a threshold sweep.
    Compare(compare::CompareArgs),
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return EXIT_FAILURE;
        }
    };
    let seed = cli.seed;
    let result = pool.install(|| match &cli.command {
        Command::Bound(a) => bound::run(a),
        Command::Verify(a) => verify::run(a, seed),
        Command::Simulate(a) => simulate::run(a, seed),
        Command::Compare(a) => compare::run(a),
    });
    match result {
        Ok(report) => {
            if let Err(e) = output::write(cli.format, &report.records, out) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAILURE;
            }
            report.code
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}
