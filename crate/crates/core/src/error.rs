use thiserror::Error;

/// Errors produced by the simulation and optimization pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two nodes share a position, so a link has no distance or bearing.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The beam target lies (numerically) inside the span of the null directions.
    #[error("infeasible beam: residual {residual:.3e} below threshold {threshold:.3e}")]
    InfeasibleBeam { residual: f64, threshold: f64 },

    /// The exact admission solver was asked for more users than it is allowed to enumerate.
    #[error("capacity error: K = {k} exceeds the exhaustive limit {limit} and branch-and-bound is disabled")]
    Capacity { k: usize, limit: usize },

    /// A configuration key is missing, unknown, or holds an invalid value.
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
