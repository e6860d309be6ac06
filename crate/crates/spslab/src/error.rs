use std::fmt;

/// Errors raised by problem construction, optimizer steps and the harness.
#[derive(Debug)]
pub enum Error {
    /// Inconsistent or incomplete configuration.
    Config(String),
    /// Config file could not be parsed; `line` is 1-based.
    Parse { line: usize, msg: String },
    /// A rate certificate needs a constant the problem did not provide.
    MissingConstant(&'static str),
    /// A linear system or fit is singular.
    Degenerate(String),
    /// A non-finite value appeared; `iteration` is attached when known.
    NonFinite {
        what: String,
        iteration: Option<usize>,
    },
    /// Invalid argument (batch sizes, dimensions, parameter ranges).
    Invalid(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            Error::MissingConstant(name) => {
                write!(f, "certificate requires constant `{name}` which is absent")
            }
            Error::Degenerate(msg) => write!(f, "degenerate problem: {msg}"),
            Error::NonFinite { what, iteration } => match iteration {
                Some(t) => write!(f, "non-finite {what} at iteration {t}"),
                None => write!(f, "non-finite {what}"),
            },
            Error::Invalid(msg) => write!(f, "invalid argument: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl Error {
    /// Attaches an iteration index to a non-finite error, leaves others alone.
    pub fn at_iteration(self, t: usize) -> Self {
        match self {
            Error::NonFinite { what, .. } => Error::NonFinite {
                what,
                iteration: Some(t),
            },
            other => other,
        }
    }
}
