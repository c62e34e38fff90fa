// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("metric must be symmetric and involutive")]
    InvalidMetric,

    #[error("matrix is not Hermitian: max |H - H†| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("chain has {len} points, above the cap of {max}; lower nu*t or raise the cap")]
    ChainTooLong { len: usize, max: usize },

    #[error("state vector must have unit norm, got {norm}")]
    NotNormalized { norm: f64 },

    #[error("operation requires a non-empty chain")]
    EmptyChain,

    #[error("increments {0} and {1} do not live in the same representation")]
    IncompatibleIncrements(&'static str, &'static str),

    #[error("product does not lie in the increment basis")]
    OutsideBasis,
}

pub type Result<T> = std::result::Result<T, Error>;
