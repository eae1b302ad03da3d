use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("space has no points")]
    EmptySpace,
    #[error("distance matrix is not square: row {row} has length {len}, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("mass vector has length {got}, expected {expected}")]
    MassLength { got: usize, expected: usize },
    #[error("distance matrix is asymmetric at ({0}, {1})")]
    AsymmetricDistance(usize, usize),
    #[error("invalid distance at ({0}, {1})")]
    InvalidDistance(usize, usize),
    #[error("triangle inequality violated: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    TriangleInequalityViolation(usize, usize, usize),
    #[error("mass at point {0} is not positive")]
    NonpositiveMass(usize),
    #[error("graph is disconnected: point {0} is unreachable from point 0")]
    DisconnectedGraph(usize),
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("open set is empty")]
    OIsEmpty,
    #[error("open set is the whole space, so its complement is empty")]
    OIsAllOfX,

    #[error("p must lie in [1, inf], got {0}")]
    InvalidP(f64),
    #[error("time grids differ")]
    GridMismatch,
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("unknown region kind `{0}`")]
    UnknownKind(String),
    #[error("field has {got} entries, expected {expected}")]
    FieldLength { got: usize, expected: usize },

    #[error("field contains non-finite values")]
    NonfiniteValues,
    #[error("field is not a Carleson atom on the given ball: {0}")]
    NotACarlesonAtom(String),
    #[error("invalid density parameters: {0}")]
    InvalidDensityConfig(String),

    #[error("inconsistent incidence: {0}")]
    InconsistentIncidence(String),
    #[error("complex has {got} simplices, more than the supported {limit}")]
    TooLarge { got: usize, limit: usize },
    #[error("simplex {0} has a non-positive weight")]
    NonpositiveWeight(usize),

    #[error("z = {0} lies outside the function's domain")]
    OutsideDomain(Complex64),
    #[error("branch cut hit at z = {0}")]
    BranchCutHit(Complex64),
    #[error("resolvent solve failed at z = {0}")]
    ResolventSolveFailure(Complex64),
    #[error("contour tail tolerance unmet: estimate {estimate:e} > {tolerance:e}")]
    TailToleranceUnmet { estimate: f64, tolerance: f64 },
    #[error("operator is not self-adjoint in the weighted inner product (defect {0:e})")]
    NotSelfAdjoint(f64),
    #[error("eigensolver failed")]
    EigensolveFailure,
    #[error("invalid sector parameters: {0}")]
    InvalidSector(String),
    #[error("reproducing pair is degenerate: normalizing integral is {0}")]
    DegeneratePsi(f64),
    #[error("phi vanishes at z = {0}")]
    PhiVanishes(Complex64),
    #[error("sector angle {0} is not below pi/4")]
    ThetaTooLarge(f64),
    #[error("function descriptor: {0}")]
    BadDescriptor(String),

    #[error("empty simplex set")]
    EmptySet,

    #[error("atom fails validation: {0}")]
    AtomInvalid(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
