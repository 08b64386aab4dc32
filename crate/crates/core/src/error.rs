use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Zero marginal weight; `coordinate` is 1-based.
    #[error("degenerate margin at coordinate {coordinate}")]
    DegenerateMargin { coordinate: usize },

    #[error("degenerate measure: every marginal weight vanishes")]
    DegenerateMeasure,

    #[error(
        "quadrature did not converge: estimate {value}, achieved error {achieved:e}, requested {requested:e}"
    )]
    Quadrature { value: f64, achieved: f64, requested: f64 },

    #[error("measure is not canonical (max marginal moment deviation {deviation:e})")]
    NotCanonical { deviation: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. })
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
