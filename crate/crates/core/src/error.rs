use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported for this RIS mode: {0}")]
    UnsupportedMode(String),

    #[error("channel not visible to transmitter {tx}: {what}")]
    OutOfScope { tx: usize, what: String },

    #[error("search space of {configs} configurations exceeds the cap of {cap}")]
    SearchSpaceTooLarge { configs: f64, cap: u64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
