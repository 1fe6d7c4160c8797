use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function (negative substrate,
    /// a mass outside `[0, M]`, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid run or model configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A kinetics function cannot be evaluated or bounded.
    #[error("kinetics error: {0}")]
    Kinetics(String),

    /// A linear system that must be stable is not (non-Hurwitz drift matrix,
    /// unstable or washout equilibrium where a stable one is required).
    #[error("stability error: {0}")]
    Stability(String),

    /// A numerical invariant was violated mid-run. The name identifies the
    /// invariant.
    #[error("invariant violated [{name}]: {detail}")]
    Invariant { name: &'static str, detail: String },

    /// Time grids that must match do not.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// The input lacks the detail needed for the requested analysis.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// No replicate survived to the conditioning time.
    #[error("empty quasi-stationary sample: no surviving replicate at t = {time}")]
    EmptyQsd { time: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invariant(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            name,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
