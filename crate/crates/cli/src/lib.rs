//! Command-line front end for `lensrr-core`.

pub mod args;
pub mod commands;
pub mod suite;
pub mod svg;

use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::Parser;

pub use args::Cli;

/// Exit code for usage and input errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for failed verification.
pub const EXIT_FAILED: i32 = 1;

/// Text for stdout and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// A bad flag combination, parameter or input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

/// Cap the global thread pool from `LENSRR_THREADS`.
pub fn init_threads() -> Result<(), UsageError> {
    let Ok(v) = std::env::var("LENSRR_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| UsageError(format!("LENSRR_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| UsageError(e.to_string()))
}

/// Parse `args` and run; returns stdout, stderr and the exit code.
pub fn main_with<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 { (text, String::new(), 0) } else { (String::new(), text, EXIT_USAGE) };
        }
    };
    match catch_unwind(AssertUnwindSafe(|| commands::run(cli.command))) {
        Ok(Ok(out)) => (out.stdout, String::new(), out.code),
        Ok(Err(UsageError(msg))) => (String::new(), format!("error: {msg}\n"), EXIT_USAGE),
        Err(_) => (String::new(), "error: internal failure\n".into(), EXIT_USAGE),
    }
}
