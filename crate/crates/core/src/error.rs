use thiserror::Error;

/// Errors raised by the simulator, the converter models and the report builders.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (shape mismatch, out-of-range index, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Inconsistent configuration: spec/weights/dataset disagree, empty inputs, bad parameters.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),

    #[error(transparent)]
    Frame(#[from] FrameError),

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Decode failures for the binary checkpoint format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckpointError {
    #[error("bad magic {found:02x?}, expected \"NSNN\"")]
    BadMagic { found: Vec<u8> },

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("checkpoint truncated while reading {record}")]
    Truncated { record: String },

    #[error("checkpoint spec blob is not valid: {0}")]
    SpecBlob(String),

    #[error("tensor record {record} has shape {found:?}, spec expects {expected:?}")]
    ShapeMismatch {
        record: String,
        found: Vec<usize>,
        expected: Vec<usize>,
    },

    #[error("{0} trailing bytes after final tensor record")]
    TrailingBytes(usize),
}

/// Decode failures for 32-bit SPI frames.
#[derive(Debug, Error, PartialEq, Eq, Clone, Copy)]
pub enum FrameError {
    #[error("integrity error: crc {found:#04x} does not match computed {computed:#04x}")]
    Crc { found: u8, computed: u8 },

    #[error("protocol error: reserved bits are {0:#b}, must be zero")]
    Reserved(u8),

    #[error("protocol error: {0}")]
    Field(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
