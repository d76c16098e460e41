use thiserror::Error;

/// Errors raised by the geometric oracles, constructions and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
    #[error("direction has zero norm")]
    ZeroDirection,
    #[error("facet normal {0} has zero norm")]
    ZeroNormal(usize),
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("polar vertices need every offset equal to 1 (row {row} has {offset})")]
    NonUnitOffsets { row: usize, offset: f64 },
    #[error("point is not in the convex hull of the generators (residual {residual:e})")]
    NotInHull { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {got} too small, need at least {min}")]
    DimensionTooSmall { min: usize, got: usize },
    #[error("vectors are not orthogonal (inner product {0:e})")]
    NotOrthogonal(f64),
    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("subsets live on different ground sets ([{0}] vs [{1}])")]
    MismatchedGround(usize, usize),
    #[error("argument out of range: {0}")]
    BadRange(String),
    #[error("outside the admissible regime: {0}")]
    OutOfRegime(String),
    #[error("no separated family of {wanted} subsets found ({found} kept after {attempts} consecutive rejections)")]
    FamilyNotFound { wanted: usize, found: usize, attempts: usize },
    #[error("homothety ratio {r} gives k = {k_raw:.4}, which rounds to zero")]
    DegenerateK { r: f64, k_raw: f64 },
    #[error("certificate hypotheses were not verified")]
    UnverifiedCertificate,
    #[error("point is not in the polar body: {0}")]
    NotInPolar(String),
    #[error("net strategy `{strategy}` unavailable in dimension {dim}")]
    StrategyUnavailable { strategy: &'static str, dim: usize },
    #[error("support value {value} outside [1, {r}] at net point {index}")]
    OracleRangeViolation { index: usize, value: f64, r: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
