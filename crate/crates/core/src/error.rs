use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice state must contain at least one site")]
    EmptyState,

    #[error("non-finite potential value {value} at site {site}, step {step}")]
    NonFinitePotential { site: i64, step: u64, value: String },

    #[error("overflow guard tripped at step {step}: max amplitude {max_amplitude:e} exceeds {guard:e}")]
    Overflow { step: u64, max_amplitude: f64, guard: f64 },

    #[error("channel search failed: {0}")]
    ChannelSearch(String),

    #[error("scattering not complete: {0}")]
    ScatteringIncomplete(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("config not found: {}", .0.display())]
    ConfigNotFound(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data in {}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
