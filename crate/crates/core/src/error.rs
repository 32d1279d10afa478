use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps `InvalidParameter`, `InvalidState`, `Config` and `Io` to exit
/// code 1 and `Numerical` to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coupling denominator can vanish: {0}")]
    SingularCoupling(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("time grid: {0}")]
    Grid(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the computation itself rather than of its inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
