//! Command-line front end for `gdtraj`.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 infeasible or
//! unstabilizable problem, 3 failed check.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub mod args;
mod check;
mod design;
pub mod files;
mod simulate;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

impl From<gdtraj::Error> for CliError {
    fn from(e: gdtraj::Error) -> Self {
        match e {
            gdtraj::Error::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Runs one command; returns the process exit code. Reports go to `out`,
/// diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Synth {
            problem,
            output,
            shaping,
        } => design::synth(&problem, &output, &shaping, out),
        Command::Lqr { problem, output, x0 } => design::lqr(&problem, &output, x0, out),
        Command::Hb {
            problem,
            output,
            shaping,
            delay_weight,
        } => design::hb(&problem, &output, &shaping, delay_weight, out),
        Command::Check { design, problem } => check::check(&design, &problem, out),
        Command::Sim {
            design,
            problem,
            output,
            steps,
            x0,
            angles,
            levels,
        } => simulate::sim(
            &design,
            &problem,
            &output,
            simulate::SimArgs {
                steps,
                x0,
                angles,
                levels,
            },
            out,
        ),
        Command::Compare {
            first,
            second,
            problem,
            steps,
            x0,
        } => simulate::compare(&first, &second, &problem, steps, x0, out),
    }
}

pub(crate) fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

/// `[a, b; c, d]` with 6 decimals.
pub(crate) fn fmt_matrix(m: &gdtraj::Matrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[{}]", rows.join("; "))
}
