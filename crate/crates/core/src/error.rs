use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the core operations.
///
/// Every variant names the operation or argument that failed so callers can
/// surface it directly.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated its documented precondition.
    InvalidArgument {
        op: &'static str,
        reason: String,
    },
    /// A point was not on the plane the operation requires.
    OffPlane {
        op: &'static str,
        expected_x: f64,
        got_x: f64,
    },
    /// A `Y` chart code was passed where only `X` chart codes are accepted.
    WrongChart { op: &'static str },
    /// A code family contained the same code twice.
    DuplicateCode { index: usize },
    /// The sampler cannot be restricted to an `x`-slab.
    NoSlabRestriction { label: String },
}

impl Error {
    pub(crate) fn invalid(op: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            op,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument { op, reason } => write!(f, "{op}: {reason}"),
            Error::OffPlane {
                op,
                expected_x,
                got_x,
            } => write!(f, "{op}: point has x = {got_x}, expected x = {expected_x}"),
            Error::WrongChart { op } => write!(f, "{op}: only x-parameterised codes are accepted"),
            Error::DuplicateCode { index } => write!(f, "code family: duplicate code at index {index}"),
            Error::NoSlabRestriction { label } => {
                write!(f, "coarea_check: sampler '{label}' cannot be restricted to an x-slab")
            }
        }
    }
}

impl core::error::Error for Error {}
