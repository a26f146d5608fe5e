use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("numerics error: {0}")]
    Numerics(String),

    #[error("orbit error: {0}")]
    Orbit(String),

    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    #[error("Hilbert metric undefined: both functions vanish on the mask")]
    UndefinedMetric,

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("system is not analytic: {0}")]
    NotAnalytic(String),

    #[error("depth limit exceeded: {0}")]
    Depth(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line frontend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Json(_) | Error::Orbit(_) => 2,
            Error::Numerics(_)
            | Error::Grid(_)
            | Error::DegenerateSystem(_)
            | Error::UndefinedMetric
            | Error::Depth(_) => 3,
            Error::Inconclusive(_) => 4,
            _ => 1,
        }
    }
}
