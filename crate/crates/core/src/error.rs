use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The extracted boundary came too close to zero for the drift term `sf'/sf`.
    #[error("boundary guard violated at tau={tau}: |sf|={sf:e} below {floor:e}")]
    BoundaryGuard { tau: f64, sf: f64, floor: f64 },

    #[error("non-finite gradient at training step {step}")]
    NonFiniteGradient { step: usize },

    #[error("training aborted at step {step}: {source}")]
    Training {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("PSOR did not converge within {iterations} iterations at time step {step}")]
    PsorNoConvergence { step: usize, iterations: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
