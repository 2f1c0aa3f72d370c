use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A system configuration is not physically meaningful or not supported.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The aliasing budget cannot be met with the available feedback SNR
    /// (lambda * feedback SNR must exceed one).
    #[error("error floor violated: lambda * feedback SNR = {product:.6} <= 1 (lambda = {lambda:.6e})")]
    ErrorFloor { lambda: f64, product: f64 },

    /// The aliasing term alone already consumes the whole error budget.
    #[error("infeasible: aliasing floor {aliasing:.3e} exceeds target error probability {target:.3e}")]
    Infeasible { aliasing: f64, target: f64 },

    /// Inputs handed to a trial runner or driver do not fit its contract.
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// True for the error classes the CLI reports with exit code 2.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::ErrorFloor { .. } | Error::Infeasible { .. })
    }
}
