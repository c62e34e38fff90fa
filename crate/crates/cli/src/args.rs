// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{PropagateMethod, SweepMode};

#[derive(Debug, Parser)]
#[command(name = "ito-dilation", version, about = "Verify, propagate and sweep pseudo-Hilbert dilations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every identity check; exit 1 if any fails.
    Verify(VerifyArgs),
    /// Compute the boosted propagator by one method.
    Propagate(PropagateArgs),
    /// Emit one row per grid point (CSV by default).
    Sweep(SweepArgs),
    /// Sample one chain and report the compound state.
    Trajectory(TrajectoryArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Verify(a) => &a.common,
            Command::Propagate(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Trajectory(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON Hamiltonian file: {"dim": d, "matrix": [[[re, im], ...], ...]}.
    #[arg(long, value_name = "PATH")]
    pub hamiltonian: Option<PathBuf>,
    /// pauli-x, pauli-y, pauli-z or random-hermitian:D:SEED (default pauli-z).
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Override a check threshold, e.g. --tol mc_expectation=1e-30.
    #[arg(long, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Include wall_time in the report (breaks byte-identical output).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, hide = true)]
    pub perturb_dt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    ExactSeries,
    Expm,
    Mc,
}

impl From<MethodArg> for PropagateMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::ExactSeries => PropagateMethod::ExactSeries,
            MethodArg::Expm => PropagateMethod::Expm,
            MethodArg::Mc => PropagateMethod::Mc,
        }
    }
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, value_enum, default_value = "exact-series")]
    pub method: MethodArg,
    #[arg(long, default_value_t = ito_dilation::chains::DEFAULT_TRUNCATION)]
    pub truncation: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    McSamples,
    LargeNumber,
    CentralLimit,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::McSamples => SweepMode::McSamples,
            ModeArg::LargeNumber => SweepMode::LargeNumber,
            ModeArg::CentralLimit => SweepMode::CentralLimit,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Comma-separated grid: sample counts for mc-samples, ν otherwise.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Boost for mc-samples; ignored by the other modes.
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Samples per grid point for large-number.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// uniform, eigen:K, basis:K, or a JSON list of [re, im] pairs.
    #[arg(long, default_value = "uniform")]
    pub psi: String,
}
