use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "invalid lattice dimensions {m}x{n}: m (cell axis) must be a multiple of 4 and at least 4, \
         n (memory axis) must be a multiple of 32 and at least 32"
    )]
    InvalidDims { m: usize, n: usize },

    #[error("{what} {value} out of range [0, {bound})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        bound: usize,
    },

    #[error("size mismatch: {0}")]
    Size(String),

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("sequence too short for {test}: need at least {min} samples, got {len}")]
    TooShort {
        test: &'static str,
        min: usize,
        len: usize,
    },

    #[error("random map has no entry for sweep {sweep}, {phase} phase, spin {index}")]
    MissingRandom {
        sweep: u64,
        phase: &'static str,
        index: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("no equilibrated samples left after discarding the transient; run longer")]
    NoEquilibratedData,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
