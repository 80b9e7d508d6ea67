use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A series was truncated at `max_terms` before reaching the tolerance.
    #[error("{op}: series did not converge within {terms} terms")]
    Convergence { op: &'static str, terms: usize },

    /// A configuration value is invalid or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A finite patch requested more sites than the configured bound.
    #[error("patch of {sites} sites exceeds the limit of {limit}")]
    PatchTooLarge { sites: usize, limit: usize },

    /// A numerical self-check (hermiticity, symmetry) failed.
    #[error("{op}: consistency check failed: {msg}")]
    Consistency { op: &'static str, msg: String },

    /// A normal mode sits exactly on the drive frequency.
    #[error("{op}: mode {mode} is resonant with the drive")]
    Resonance { op: &'static str, mode: usize },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    /// Name of the operation that failed, when one is recorded.
    pub fn operation(&self) -> Option<&'static str> {
        match self {
            Error::Domain { op, .. }
            | Error::Convergence { op, .. }
            | Error::Consistency { op, .. }
            | Error::Resonance { op, .. } => Some(op),
            Error::Config(_) | Error::PatchTooLarge { .. } => None,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::Consistency { .. } | Error::Resonance { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
