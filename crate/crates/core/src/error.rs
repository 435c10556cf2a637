use thiserror::Error;

use crate::margin::MarginCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature did not reach tolerance: error estimate {estimate:e} > target {target:e} after {subdivisions} subdivisions"
    )]
    ToleranceNotMet {
        estimate: f64,
        target: f64,
        subdivisions: usize,
    },

    /// The coarse scan found its smallest objective value at a bracket endpoint.
    #[error("minimizer escaped the bracket [{lo}, {hi}]")]
    BracketNotMinimizing { lo: f64, hi: f64 },

    #[error("no sign change of the adjusted margin over [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    /// Solver stopped before the certificate gap reached the tolerance. Carries
    /// the best certificate found, which is still a valid pair of bounds.
    #[error("max-margin solver stopped with gap {:e} above tolerance", .0.gap)]
    IterationLimit(Box<MarginCertificate>),

    #[error("storage failed at site {site}: margin upper bound {:e}", .certificate.margin_upper)]
    StorageFailed {
        site: usize,
        certificate: Box<MarginCertificate>,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
