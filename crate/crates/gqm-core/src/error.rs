use thiserror::Error;

use crate::morse::MorseReport;
use crate::witten::DivergenceReport;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A traversal required a connected graph and could not reach `vertex`.
    #[error("graph is disconnected: vertex {vertex} is unreachable from the root")]
    Disconnected { vertex: u64 },

    /// A function failed the discrete Morse conditions.
    #[error("invalid Morse function:\n{0}")]
    InvalidMorse(Box<MorseReport>),

    /// A caller-visible precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An s -> infinity limit does not exist; entries with positive exponents listed.
    #[error("deformed operator diverges as s -> infinity:\n{0}")]
    Divergent(Box<DivergenceReport>),

    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
