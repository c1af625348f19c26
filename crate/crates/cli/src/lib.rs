//! Command line and HTTP front ends for `cryptarg-core`.

mod commands;
mod output;
pub mod server;
pub mod store;
pub mod views;

pub use commands::{run, subcommand_names};
pub use output::color_enabled;

use cryptarg_core::{AfError, CaseError, ChainError, SchemeError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Af(#[from] AfError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("chain has {0} validation finding(s)")]
    Findings(usize),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("i/o error: {0}")]
    Output(std::io::Error),
}
