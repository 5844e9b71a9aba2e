use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("{format} parse error at {location}: {message}")]
    Parse { format: &'static str, location: String, message: String },

    #[error("mesh has no triangles left after dropping {dropped} degenerate ones")]
    EmptyMesh { dropped: usize },

    #[error("triangle {triangle} references vertex {index}, but the mesh has {vertex_count} vertices")]
    VertexIndex { triangle: usize, index: usize, vertex_count: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("camera id {id} out of range (m = {m})")]
    IdOutOfRange { id: usize, m: usize },

    #[error("camera id {0} is already in the solution")]
    AlreadySelected(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("brute force needs {required} subsets, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("quality function {index} ({name}) scores zero on its own solution")]
    DegenerateObjective { index: usize, name: String },

    #[error("audit grid needs {required} bytes, budget is {budget}")]
    MemoryBudget { required: u64, budget: u64 },

    #[error("unknown camera id {0}")]
    UnknownCamera(u32),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("session service is not running")]
    ServiceStopped,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
