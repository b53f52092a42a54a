//! Central error type for the laboratory.
//!
//! Every fallible public operation returns [`Result`].  Variants are coarse
//! enough to map onto stable C error codes (see the `qcurv-ffi` crate) while
//! keeping enough payload for a useful CLI message.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside the admissible range of the operator family
    /// (dimension, order, truncation degree, node counts, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A requested grid/basis combination is not implemented.  Full
    /// (non-symmetric) grids exist for n = 2 and n = 3 only; axially
    /// symmetric grids exist for every n >= 2.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Two objects that must live on the same discretization do not.
    #[error("mismatched discretizations: {0}")]
    Mismatch(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),

    /// A quantity required to be bounded away from zero degenerated
    /// (vanishing denominator, singular normal matrix, degenerate Hessian).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// Errors found while reading a run configuration.  Collects *all*
    /// problems, one per line, so a user can fix them in one pass.
    #[error("configuration errors:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn mismatch(msg: impl Into<String>) -> Self {
        Error::Mismatch(msg.into())
    }

    pub fn no_convergence(msg: impl Into<String>) -> Self {
        Error::NoConvergence(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
