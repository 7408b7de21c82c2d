use thiserror::Error;

/// Errors raised by mesh construction, geometry, and linear algebra.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate tetrahedron {tet}: |volume| = {volume:e} below {threshold:e}")]
    DegenerateTet { tet: usize, volume: f64, threshold: f64 },

    #[error("negative dual measure ({what}) at index {index}: {value:e}")]
    NegativeMeasure { what: &'static str, index: usize, value: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: pivot {pivot:e} at row {row}")]
    SingularMatrix { row: usize, pivot: f64 },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("factorization failed: {0}")]
    Factorization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
