use thiserror::Error;

/// Errors shared across the alignment toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A geometric precondition was violated (zero-length direction,
    /// degenerate segment, non-finite input).
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    /// A session line could not be parsed. Line numbers are 1-based and
    /// count the header.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The session file declares a format version this build does not read.
    #[error("unsupported session format version {0}")]
    UnsupportedVersion(u32),

    /// An iterative solver produced a non-finite state.
    #[error("solver diverged: {0}")]
    SolverDiverged(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
