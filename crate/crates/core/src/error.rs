use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rule code {0} out of range (expected 0..=31)")]
    RuleCode(u32),

    #[error("invalid rule row {0:?}: expected five binary digits")]
    RuleRow(String),

    #[error("site index {index} out of range for chain of length {n}")]
    SiteIndex { index: usize, n: usize },

    #[error("chain lengths differ: x has {x}, y has {y}")]
    ChainMismatch { x: usize, y: usize },

    #[error("invalid cell value {0}: cells must be 0 or 1")]
    CellValue(u8),

    #[error("space-time matrix too small: need n >= 3 and tau >= 2, got n={n}, tau={tau}")]
    MatrixTooSmall { n: usize, tau: usize },

    #[error("chain too short for seeding: need n >= {min}, got {n}")]
    ChainTooShort { n: usize, min: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty rule set: {0}")]
    EmptyGroup(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config hash mismatch in {path}: manifest has {found:016x}, current config is {expected:016x}")]
    ConfigMismatch {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("malformed input {path}: {msg}")]
    Malformed { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
