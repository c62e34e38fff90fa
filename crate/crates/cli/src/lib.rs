// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for `ito-dilation`.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 I/O or malformed
//! input file, 3 validation error, 4 chain longer than the configured cap.

pub mod args;
pub mod commands;
pub mod input;
pub mod report;

use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use crate::args::{Cli, Command, Format};
use crate::commands::{
    propagate, sweep, trajectory, verify, PropagateOptions, SweepOptions, Tolerances, TrajectoryOptions,
    VerifyOptions,
};
use crate::input::{load_hamiltonian, preset};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_CHAIN_CAP: i32 = 4;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(
        "sampled chain has {len} points but the cap is {max}; lower nu*t or raise ITO_DILATION_MAX_CHAIN"
    )]
    ChainCap { len: usize, max: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::ChainCap { .. } => EXIT_CHAIN_CAP,
        }
    }
}

/// What a run produced: text for stdout (empty when written to `--out`),
/// a diagnostic for stderr, and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn error(e: CliError) -> Self {
        Self {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: e.exit_code(),
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_PASS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            };
        }
    };
    match execute(&cli) {
        Ok(o) => o,
        Err(e) => Outcome::error(e),
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let common = cli.command.common();
    let (hamiltonian, source) = match (&common.hamiltonian, &common.preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation("pass either --hamiltonian or --preset, not both".into()))
        }
        (Some(path), None) => (load_hamiltonian(path)?, path.display().to_string()),
        (None, Some(name)) => (preset(name)?, name.clone()),
        (None, None) => (preset("pauli-z")?, "pauli-z".to_string()),
    };
    let tolerances = Tolerances::parse(&common.tol)?;
    let start = Instant::now();

    let (text, pass) = match &cli.command {
        Command::Verify(a) => {
            let report = verify(&VerifyOptions {
                hamiltonian,
                source,
                t: a.t,
                nu: a.nu,
                samples: a.samples,
                seed: common.seed,
                tolerances,
                perturb_dt: a.perturb_dt,
            })?;
            render(report, common.format.unwrap_or(Format::Json), common.timing, start)
        }
        Command::Propagate(a) => {
            let report = propagate(&PropagateOptions {
                hamiltonian,
                source,
                t: a.t,
                nu: a.nu,
                method: a.method.into(),
                truncation: a.truncation,
                samples: a.samples,
                seed: common.seed,
                tolerances,
            })?;
            render(report, common.format.unwrap_or(Format::Json), common.timing, start)
        }
        Command::Sweep(a) => {
            let opts = SweepOptions {
                hamiltonian,
                source,
                mode: a.mode.into(),
                grid: a.grid.clone(),
                t: a.t,
                nu: a.nu,
                samples: a.samples,
                seed: common.seed,
                tolerances,
            };
            let table = sweep(&opts)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => (table.to_csv(), table.pass()),
                Format::Json => render(table.to_report(&opts), Format::Json, common.timing, start),
            }
        }
        Command::Trajectory(a) => {
            let report = trajectory(&TrajectoryOptions {
                hamiltonian,
                source,
                t: a.t,
                nu: a.nu,
                seed: common.seed,
                psi: a.psi.clone(),
            })?;
            render(report, common.format.unwrap_or(Format::Json), common.timing, start)
        }
    };

    let code = if pass { EXIT_PASS } else { EXIT_CHECK_FAILED };
    match &common.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(Outcome {
                stdout: String::new(),
                stderr: String::new(),
                code,
            })
        }
        None => Ok(Outcome {
            stdout: text,
            stderr: String::new(),
            code,
        }),
    }
}

fn render(mut report: report::RunReport, format: Format, timing: bool, start: Instant) -> (String, bool) {
    if timing {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    let pass = report.pass;
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    (text, pass)
}
