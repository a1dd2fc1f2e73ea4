use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter fell outside its admissible range.
    #[error("{name} = {value} is outside its domain: {bound}")]
    Domain {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("decay rate is singular: C * theta = {product} must be < 1")]
    Singular { product: f64 },

    #[error("absorption rate is infinite at theta = 0 (projective limit)")]
    InfiniteRate,

    #[error("correlation is not identifiable: {0}")]
    NonIdentifiable(&'static str),

    #[error("malformed fit: {0}")]
    MalformedFit(String),

    #[error("both spectral kernels are delta-function degenerate (|C| = 1 and theta = 1)")]
    DegenerateKernels,

    #[error("quadrature did not converge with {nodes} nodes: estimate {estimate:e}, relative change {change:e}")]
    Convergence {
        estimate: f64,
        change: f64,
        nodes: usize,
    },

    #[error("{0}")]
    Resource(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, bound: &'static str) -> Self {
        Error::Domain { name, value, bound }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. } | Error::UnknownKeys(_) | Error::Config(_) | Error::Invalid(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}
