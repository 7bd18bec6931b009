use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not certified (or not implemented) on the given space.
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    /// No fundamental domain or completeness certificate is known for the group.
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),

    /// An integral or series diverges on the requested input.
    #[error("divergence: {0}")]
    Divergence(String),

    /// A numerical procedure failed to reach its tolerance.
    #[error("numerical failure: {message} (residual estimate {residual:e})")]
    Numerical { message: String, residual: f64 },

    /// The group fails the critical-exponent gate required by automorphic operations.
    #[error("class violation: {0}")]
    ClassViolation(String),

    /// The bound profile vanishes where the kernel does not.
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    /// The request is well formed but cannot be honoured without extra options.
    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
