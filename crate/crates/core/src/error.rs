use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Convergence,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face {face} has {count} vertices; only triangles are supported")]
    NonTriangleFace { face: usize, count: usize },
    #[error("non-manifold edge ({0}, {1}): shared by more than two triangles or inconsistently oriented")]
    NonManifoldEdge(usize, usize),
    #[error("triangle {face} is degenerate (area {area:e} below threshold {threshold:e})")]
    DegenerateTriangle { face: usize, area: f64, threshold: f64 },
    #[error("triangle {face} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: usize, count: usize },
    #[error("topology: {0}")]
    Topology(String),
    #[error("mesh has zero total area")]
    ZeroArea,
    #[error("vertex {0} is not referenced by any triangle")]
    IsolatedVertex(usize),
    #[error("invalid corners: {0}")]
    InvalidCorners(String),
    #[error("triangle inequality violated in face {0}")]
    TriangleInequality(usize),
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("{solver}: step size underflow after {halvings} halvings")]
    StepUnderflow { solver: &'static str, halvings: usize },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("layout: {0}")]
    Layout(String),
    #[error("uv triangle {0} is flipped or degenerate")]
    FlippedTriangle(usize),
    #[error("duplicate sites {0} and {1}")]
    DuplicateSites(usize, usize),
    #[error("power cell {0} is empty")]
    EmptyCell(usize),
    #[error("resolution {0} must be a power of two")]
    NotPowerOfTwo(usize),
    #[error("image: {0}")]
    Image(String),
    #[error("missing sidecar {0}")]
    MissingSidecar(PathBuf),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoConvergence { .. } | Error::StepUnderflow { .. } => ErrorKind::Convergence,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
