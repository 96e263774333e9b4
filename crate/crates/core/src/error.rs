use std::fmt;

use crate::fit::FringeFit;

/// Position-tagged failure from the config or quantity parser.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>, snippet: &str) -> Self {
        Self {
            line: line.max(1),
            column: column.max(1),
            message: message.into(),
            snippet: snippet.to_string(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        writeln!(f, "  | {}", self.snippet)?;
        write!(f, "  | {}^", " ".repeat(self.column.saturating_sub(1)))
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid setup: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("integration grid does not cover term supports: {0}")]
    GridCoverage(String),

    #[error("fringe fit did not converge after {iterations} iterations (best rms residual {:.3e})", best.rms_residual)]
    FitFailed { iterations: usize, best: Box<FringeFit> },

    #[error("event stream is not sorted by timestamp at index {0}")]
    UnsortedStream(usize),

    #[error("amplitude terms carry zero total weight")]
    ZeroWeight,

    #[error("malformed curve data: {0}")]
    CurveFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
