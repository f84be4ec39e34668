use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter is outside its allowed range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An argument falls outside the domain where the quantity is defined.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("singular covariance matrix (det = {det:e})")]
    SingularCovariance { det: f64 },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    /// An integrator invariant drifted beyond tolerance.
    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },

    #[error("time {t} is not a stored time of the propagator record")]
    TimeNotInRecord { t: f64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}
