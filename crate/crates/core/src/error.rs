use thiserror::Error;

use crate::ring::Ring;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance table is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("distance table is asymmetric at ({0}, {1})")]
    AsymmetricInput(usize, usize),
    #[error("negative distance at ({0}, {1})")]
    NegativeDistance(usize, usize),
    #[error("nonzero diagonal entry at {0}")]
    NonZeroDiagonal(usize),
    #[error("non-finite distance at ({0}, {1})")]
    NonFiniteDistance(usize, usize),
    #[error("triangle inequality fails for ({0}, {1}, {2})")]
    TriangleViolation(usize, usize, usize),
    #[error("size limit exceeded: {what} would be {count}, cap is {cap}")]
    SizeLimit { what: &'static str, count: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("subset is empty")]
    EmptySubset,
    #[error("point index {0} is outside the space")]
    PointOutOfRange(usize),
    #[error("space has no basepoint")]
    MissingBasepoint,
    #[error("ring mismatch: expected {expected}, found {found}")]
    RingMismatch { expected: Ring, found: Ring },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a subcomplex: {0}")]
    NotASubcomplex(String),
    #[error("scale mismatch: {0} vs {1}")]
    ScaleMismatch(f64, f64),
    #[error("complex is empty")]
    EmptyComplex,
    #[error("tower has no nonempty stages")]
    EmptyTower,
    #[error("tower has {have} stages, analysis needs at least {need}")]
    InsufficientStages { have: usize, need: usize },
    #[error("complement of N_{radius}(A) is empty")]
    ComplementExhausted { radius: f64 },
    #[error("no filling found for {simplex:?} within neighborhood radius {cap}")]
    FillingNotFound { simplex: Vec<usize>, cap: f64 },
    #[error("cover mismatch: {0}")]
    CoverMismatch(String),
    #[error("invalid control function: {0}")]
    InvalidControl(String),
    #[error("chain map violation: {0}")]
    ChainMapViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}
