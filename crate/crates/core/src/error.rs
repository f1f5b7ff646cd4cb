use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("constraint violated in bin {bin} ({side} side): {detail}")]
    Constraint {
        bin: usize,
        side: char,
        detail: String,
    },
    #[error("hypothesis error: {0}")]
    Hypothesis(String),
    #[error("singular evaluation at ({x}, {y})")]
    Singular { x: f64, y: f64 },
    #[error("velocity evaluation failed: {0}")]
    Velocity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
}
