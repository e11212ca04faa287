use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {actual}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        actual: String,
    },

    /// Column index is zero-based.
    #[error("rank deficient input: column {column} has residual norm {residual:e} below tolerance {tol:e}")]
    RankDeficient { column: usize, residual: f64, tol: f64 },

    #[error("vector is not contained in the subspace (relative residual {relative_residual:e})")]
    NotInSpan { relative_residual: f64 },

    #[error("degenerate {what}: norm {norm:e} below tolerance")]
    Degenerate { what: &'static str, norm: f64 },

    #[error("updated vector rotated past the boundary (denominator {denominator:e})")]
    Overturn { denominator: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dims(op: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
