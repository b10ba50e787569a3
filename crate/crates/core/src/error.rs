use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// `Γ²ₙ ≤ 0`: the statistic cannot be studentized.
    #[error("estimate is not studentizable (variance estimate {0:e} <= 0)")]
    NonStudentizable(f64),
    #[error("kernel is not numerically positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("inadmissible weight function: {0}")]
    InvalidKernel(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("quantile table has no row for tail probability {0}")]
    MissingLevel(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
