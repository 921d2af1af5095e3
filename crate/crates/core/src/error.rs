use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    Domain(&'static str),

    #[error("invalid plant parameters: {0}")]
    InvalidPlant(String),

    #[error("inertia matrix is singular (det = {det:e})")]
    Singular { det: f64 },

    #[error("derivative returned a non-finite value at t = {t}")]
    Integration { t: f64 },

    #[error("simulation diverged at step {step}")]
    Diverged { step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid fuzzy definition: {0}")]
    Fuzzy(String),

    #[error("reference value is zero; transient metrics are undefined")]
    DegenerateReference,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Process exit codes used by the command-line front end.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad command-line usage, including a verb applied to the wrong kind
    /// of config. Matches the argument parser's own code.
    pub const USAGE: i32 = 2;
    /// Unreadable or invalid configuration, definition or gain file.
    pub const CONFIG: i32 = 3;
    /// Simulation diverged or hit a numerical failure.
    pub const SIMULATION: i32 = 4;
    /// Artifact could not be written.
    pub const IO: i32 = 5;
    /// A comparison finished with at least one failed member.
    pub const PARTIAL: i32 = 6;
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Fuzzy(_) | Error::InvalidPlant(_) => exit::CONFIG,
            Error::Domain(_)
            | Error::Singular { .. }
            | Error::Integration { .. }
            | Error::Diverged { .. }
            | Error::DegenerateReference => exit::SIMULATION,
            Error::Io { .. } => exit::IO,
            Error::Usage(_) => exit::USAGE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
