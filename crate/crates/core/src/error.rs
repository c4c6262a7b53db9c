use std::io;

use thiserror::Error;

/// Errors produced by the solvers, kernels and dataset I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("rank deficiency: column {column} has residual norm {residual:e} after projection")]
    RankDeficient { column: usize, residual: f64 },

    #[error("degenerate iterate: represented vector has squared norm {0:e}")]
    DegenerateIterate(f64),

    #[error("columns are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::DegenerateIterate(_) | Error::NotOrthonormal(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
