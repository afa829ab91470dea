use alloc::string::String;
use core::fmt;

/// Errors raised by volume construction, filtering and rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument value is out of its valid range.
    Parameter(String),
    /// A shape or size does not match what the operation requires.
    Dimension(String),
    /// Render inputs are inconsistent with the requested settings.
    Config(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Config(msg) => write!(f, "inconsistent configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
