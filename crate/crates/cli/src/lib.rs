//! The `tacservo` command line: reproducible experiments over the
//! collection, training, evaluation and contour-following pipeline.
//!
//! Exit codes: 0 on success (including runs whose trajectory failed), 2 for
//! usage and configuration errors, 3 for runtime and numeric failures.

pub mod app;
pub mod commands;
pub mod config;

use std::ffi::OsString;

use tacservo::Error;

pub use app::{Cli, Command};
pub use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Configuration(_) | Error::Parse { .. } => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Resolves the config for `cli` and runs its command.
pub fn execute(cli: &Cli) -> tacservo::Result<()> {
    let base = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let cfg = cli.resolve(base);
    match &cli.command {
        Command::Collect(a) => commands::collect(&cfg, &a.file, a.pgm).map(drop),
        Command::Train(a) => commands::train(&cfg, &a.file).map(drop),
        Command::Eval(_) => commands::eval(&cfg).map(drop),
        Command::Follow(a) => commands::follow(&cfg, a.arch).map(drop),
        Command::Table1(_) => commands::table1(&cfg).map(drop),
        Command::Plot(a) => commands::plot(&cfg, &a.trajectory, &a.file).map(drop),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::parse_from_args(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("tacservo {}: {e}", cli.name());
            exit_code(&e)
        }
    }
}
