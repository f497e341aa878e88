use thiserror::Error;

/// Errors raised by the space builders and the verifiers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("evaluation failed at {point:?}: {reason}")]
    Evaluation { point: Vec<f64>, reason: String },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("capacity exceeded: {points} points over the dense limit of {limit}; use lazy distance storage")]
    Capacity { points: usize, limit: usize },

    #[error("geometry error between points {from} and {to}: {reason}")]
    Geometry {
        from: usize,
        to: usize,
        reason: String,
    },

    #[error("inconsistent local representatives on the overlap of balls {first} and {second}: spread {spread:e}")]
    Consistency {
        first: usize,
        second: usize,
        spread: f64,
    },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
