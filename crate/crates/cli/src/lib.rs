//! Command-line front end of `moyal-core`.
//!
//! Exit codes: 0 success, 2 numerical anomaly (an infeasible certificate, a
//! violated bracket, a failed criterion), 64 usage or parse error, 65 data
//! error (leakage, non-diagonal input, ...).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod expr;
pub mod output;
pub mod plot;

use moyal_core::MoyalError;
use thiserror::Error;

pub use commands::{run, Cli, Command};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ANOMALY: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] MoyalError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) | CliError::Io(_) => EXIT_DATA,
            CliError::Core(e) => match e {
                MoyalError::InvalidContext(_)
                | MoyalError::InvalidArgument(_)
                | MoyalError::IndexConstraint(_)
                | MoyalError::OutOfRange { .. }
                | MoyalError::TooLarge { .. }
                | MoyalError::ZeroLambda
                | MoyalError::EmptyGrid => EXIT_USAGE,
                _ => EXIT_DATA,
            },
        }
    }
}
