use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Sobol dimension {requested} is not supported (max {max})")]
    UnsupportedDimension { requested: usize, max: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("unknown configuration id {0}")]
    UnknownId(usize),
    #[error("kernel matrix not positive definite even with jitter {jitter:e}")]
    SingularKernel { jitter: f64 },
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("candidate pool exhausted")]
    ExhaustedPool,
}

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}
pub(crate) use domain;
