use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    /// The image-series ratio `a_i·a_ī / (R_iī·R_īi)` must stay below one.
    #[error("series ratio {0} is not below 1; geometry outside the convergent regime")]
    NonConvergentSeries(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "composition count {count} exceeds the cap {cap}; use the convolution oracle instead"
    )]
    ComplexityCap { count: f64, cap: f64 },

    #[error("total support {support} exceeds the limit {limit}")]
    SupportOverflow { support: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
