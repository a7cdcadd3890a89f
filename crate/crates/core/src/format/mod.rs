//! Text formats: term syntax, `.fog` grammar files and `.rcm` machine
//! files. Both file formats are line-oriented with `#` comments.

mod fog;
mod rcm;
mod term;

use thiserror::Error;

pub use fog::{parse_grammar, serialize_grammar};
pub use rcm::{parse_rcm, serialize_rcm, RcmInstance};
pub use term::{parse_term, parse_term_in};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

/// Strips a trailing `#` comment and surrounding whitespace.
pub(crate) fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}
