use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("weight {value} at index {index} is not positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("support function is unbounded in this direction")]
    UnboundedSupport,
    #[error("element is outside the cone generated by the atoms")]
    NotInCone,
    #[error("gauge or support value is infinite; alignment is undefined")]
    BothInfinite,
    #[error("problem too large for enumeration: {0}")]
    TooLarge(String),
    #[error("gauge is not available for this set: {0}")]
    GaugeUnsupported(String),
    #[error("set has no Euclidean projector")]
    NoProjector,
    #[error("problem is infeasible: {0}")]
    Infeasible(String),
    #[error("exposed face is empty")]
    EmptyFace,
    #[error("columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("density {0} outside (0, 1]")]
    BadDensity(f64),
    #[error("fraction {0} outside the admissible range")]
    BadFraction(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
