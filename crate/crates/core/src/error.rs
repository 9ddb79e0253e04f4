use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has non-zero mean {mean:e} (tolerance {tol:e})")]
    NonZeroMean { mean: f64, tol: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("blow-up fit window has {found} samples, need at least {needed}")]
    InsufficientWindow { found: usize, needed: usize },

    #[error("run did not terminate by slope blow-up")]
    NoBlowup,

    #[error("parameter {name} = {value} must be non-negative")]
    NegativeParameter { name: &'static str, value: f64 },

    #[error("criterion not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("line data tail {tail:e} exceeds {limit:e}")]
    TailTooLarge { tail: f64, limit: f64 },

    #[error("field provider has no data at t = {t}")]
    ProviderGap { t: f64 },

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("wave speed ratio c/gamma = {0} outside the admissible range")]
    SpeedOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
