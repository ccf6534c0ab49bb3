use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data is malformed (non-finite entries, empty matrices).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    /// The matrix whose column space was requested is numerically zero.
    #[error("cannot build an orthonormal basis for a zero matrix")]
    EmptyBasis,

    /// Two sketch states were built from different dimensions, plans or seeds.
    #[error("sketch configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("stream exceeds the continual-release horizon of {horizon} epochs")]
    HorizonExceeded { horizon: u64 },

    #[error("sketch accumulator overflow")]
    Overflow,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad user input rather than I/O or numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::InvalidArgument(_)
                | Error::IndexOutOfRange { .. }
                | Error::ConfigMismatch(_)
                | Error::HorizonExceeded { .. }
                | Error::Parse { .. }
        )
    }
}
