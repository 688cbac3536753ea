use std::path::PathBuf;

use crate::coeff::expr::ExprError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate element {cell}: measure {measure:e} below threshold {threshold:e}")]
    DegenerateElement {
        cell: usize,
        measure: f64,
        threshold: f64,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("boundary not covered: hull facet {0:?} has no boundary face")]
    BoundaryNotCovered(Vec<usize>),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("coefficient error at ({x}, {y}, {z}): {message}")]
    Coefficient {
        x: f64,
        y: f64,
        z: f64,
        message: String,
    },

    #[error("solver did not converge: {0}")]
    Solver(String),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn coefficient(x: &crate::Point, message: impl Into<String>) -> Self {
        Error::Coefficient {
            x: x[0],
            y: x[1],
            z: x[2],
            message: message.into(),
        }
    }

    /// Wraps the error with a provenance note (element, face, level, ...).
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
