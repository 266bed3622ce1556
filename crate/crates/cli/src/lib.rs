//! Front end for the `spinbath` library: parameter sweeps and verification runs
//! with CSV or JSON output.

pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

pub use config::{Command, Flags, Format, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numeric failure {context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: spinbath::Error,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn numeric(context: impl Into<String>, source: spinbath::Error) -> Self {
        CliError::Numeric {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Numeric { .. } | CliError::Io(_) => exit::NUMERIC,
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

/// Rendered output of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    /// False when a verification command found a failing check.
    pub passed: bool,
}

/// Run a resolved configuration on a pool of the requested size.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| commands::dispatch(cfg))
}

/// Run and write to `cfg.output` or stdout; returns the process exit code.
pub fn run_and_write(cfg: &RunConfig) -> i32 {
    match run(cfg) {
        Ok(outcome) => {
            let written = match &cfg.output {
                Some(path) => std::fs::write(path, &outcome.text),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(outcome.text.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("spinbath: {}", CliError::Io(e));
                return exit::NUMERIC;
            }
            if outcome.passed {
                exit::OK
            } else {
                eprintln!("spinbath: one or more checks failed");
                exit::VERIFICATION
            }
        }
        Err(e) => {
            eprintln!("spinbath: {e}");
            e.exit_code()
        }
    }
}
