use thiserror::Error;

/// Errors raised by library operations.
///
/// The variants are grouped so that a driver can map them onto distinct
/// exit statuses: configuration/input problems, numerical failures, and
/// enumeration guards.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("dimension mismatch for {what}: got {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate solve: {0}")]
    Degenerate(String),
    #[error("enumeration guard: {0}")]
    Guard(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Dimension {
            what,
            got,
            expected,
        });
    }
    Ok(())
}
