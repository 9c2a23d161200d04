//! Benchmark harness around `topiceval-core`: corpus loading and archiving,
//! topic files, run records, sweeps over dataset × encoder grids, and
//! per-encoder reports.

pub mod archive;
pub mod cli;
pub mod commands;
pub mod error;
pub mod evaluate;
pub mod loaders;
pub mod records;
pub mod report;
pub mod sweep;
pub mod topicfile;

use std::ffi::OsString;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::Parser;

pub use error::{CliError, Result};

/// Parse `args`, run the command, print its output and return the exit code:
/// 0 on success, 1 for usage errors, 2 for data errors, 3 for internal errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();

    let outcome = catch_unwind(AssertUnwindSafe(|| commands::dispatch(cli.command)));
    match outcome {
        Ok(Ok(text)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            let _ = stdout.flush();
            0
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure (panic)");
            CliError::Internal(String::new()).exit_code()
        }
    }
}
