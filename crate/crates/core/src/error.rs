use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be {expected} bytes, got {actual}")]
    Length {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("duplex misuse: cannot {operation} while {phase}")]
    Phase {
        operation: &'static str,
        phase: &'static str,
    },

    #[error("key derivation failed: {0}")]
    Kdf(String),

    #[error("secure randomness unavailable: {0}")]
    Rng(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
