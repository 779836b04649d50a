use thiserror::Error;

/// Errors raised by the chain engine and the filling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("degenerate plane: basis vectors are linearly dependent")]
    DegeneratePlane,

    #[error("mixed simplex dimensions in one chain: {0} and {1}")]
    MixedDimensions(usize, usize),

    #[error("simplex has {got} vertices, dimension {dim} needs {}", dim + 1)]
    VertexCount { dim: usize, got: usize },

    #[error("operation needs a nonzero chain")]
    ZeroChain,

    #[error("chain is not a cycle")]
    NotACycle,

    #[error("map is not affine on the cell containing simplex {0}")]
    NotAffineOnCell(usize),

    #[error("exact clipping requires a polytope norm")]
    ExactModeNeedsPolytope,

    #[error("snap tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("radius {0} is tangent to a vertex distance in exact mode; perturb the radius")]
    Tangency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no admissible split radius in [{lo}, {hi}] around center {center}")]
    NoSplitRadius { center: String, lo: f64, hi: f64 },

    #[error("slice filling mass {filling} exceeds lambda*beta = {bound}")]
    FillingMassExceeded { filling: f64, bound: f64 },

    #[error("certificate violation: {0}")]
    Certificate(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// True for failures of a certified inequality or invariant (as opposed to bad input).
    pub fn is_certificate_failure(&self) -> bool {
        matches!(
            self,
            Error::Certificate(_) | Error::FillingMassExceeded { .. } | Error::NoSplitRadius { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
