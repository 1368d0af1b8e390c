use std::io;

use thiserror::Error;

/// Errors raised by the arithmetic, analytic and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{a} is not invertible modulo {n}")]
    NotInvertible { a: i64, n: u64 },

    #[error("{n} is not coprime to the modulus {q}")]
    NotCoprime { n: i64, q: u64 },

    #[error("{0} is not squarefree")]
    NotSquarefree(u64),

    #[error("{s} does not divide {q}")]
    NotADivisor { s: u64, q: u64 },

    #[error("{0} is not an odd prime")]
    NotPrime(u64),

    #[error("index {index} outside the tabulated range 1..={max}")]
    OutOfRange { index: u64, max: u64 },

    #[error("requested size {requested} exceeds the limit {limit}")]
    ResourceLimit { requested: u64, limit: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("corrupt tau cache: {0}")]
    CorruptCache(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
