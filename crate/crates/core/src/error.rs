use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    /// Receiver placed on top of a transmitter; the departure angle is undefined.
    #[error("degenerate geometry: receiver coincides with transmitter {tx}")]
    DegenerateGeometry { tx: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Environment stepped out of protocol (wrong agent order, finished episode, ...).
    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("enumeration of {needed} assignments exceeds cap {cap}")]
    Resource { needed: u128, cap: u128 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code used by the command line front end.
    ///
    /// The set is closed: 0 success, 2 divergence, 3 input/output, 4 resource cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 2,
            Error::Resource { .. } => 4,
            _ => 3,
        }
    }
}
