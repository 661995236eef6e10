//! Library side of the `tengauss` command-line tool: the binary dataset
//! format, CSV emission, the Monte Carlo consistency harness and dataset
//! analysis. The thin binary in `main.rs` parses flags and dispatches here.

pub mod analysis;
pub mod commands;
pub mod csvout;
pub mod dataset;
pub mod harness;

pub use tengauss_core::{Error, Result};

/// Process exit code for an error: 2 for format/I-O problems, 1 for domain
/// errors (validation, degeneracy, capacity).
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Io(_) | Error::Format(_) => 2,
        _ => 1,
    }
}
