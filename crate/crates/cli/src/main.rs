//! `fractal-walk`: simulate quantum walks whose coin sequence follows a
//! Sierpinski-gasket pattern, and export the observable tables (spreading,
//! interference, entanglement entropy, trace-distance convergence) as
//! CSV/JSON files with a reproducibility manifest.

use clap::Parser;

mod commands;
mod config;
mod output;

/// Errors mapped onto the process exit code: usage and I/O problems exit
/// with 1, violated numerical invariants (lost unitarity, failed oracle
/// comparisons) exit with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Violation(anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Violation(_) => 2,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(anyhow::anyhow!(msg.into()))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Violation(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<fractal_walk::Error> for CliError {
    fn from(e: fractal_walk::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.into())
        } else {
            CliError::Violation(e.into())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.into())
    }
}

fn main() {
    let cli = match config::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors; everything else is
            // a usage problem and must exit with code 1.
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };
    if let Err(e) = commands::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
