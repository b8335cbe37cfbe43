use std::path::PathBuf;

/// Errors surfaced by the library. All of them are usage errors: the solvers
/// themselves are total once their inputs are valid.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point index {index} out of range for a {n}-point oracle (valid: 1..={n})")]
    PointOutOfRange { index: usize, n: usize },

    #[error("metric must contain at least one point")]
    Empty,

    #[error("validation refused: n = {n} exceeds the O(n^3) sweep cap of {cap}")]
    ValidationCapExceeded { n: usize, cap: usize },

    #[error("explicit matrix with n = {n} exceeds the in-memory cap of {cap}")]
    MatrixCapExceeded { n: usize, cap: usize },

    #[error("matrix entry ({row}, {col}) = {value} is negative or not finite")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("matrix is asymmetric at ({row}, {col}): {forward} != {backward}")]
    Asymmetric {
        row: usize,
        col: usize,
        forward: f64,
        backward: f64,
    },

    #[error("malformed matrix file: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
