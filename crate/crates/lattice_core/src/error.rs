use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice")]
    DegenerateLattice,
    #[error("gram matrix is not symmetric: entry ({i},{j}) = {a} but ({j},{i}) = {b}")]
    NotSymmetric { i: usize, j: usize, a: i64, b: i64 },
    #[error("lattice is not positive definite")]
    NotPositiveDefinite,
    #[error("zero vector")]
    ZeroVector,
    #[error("rescaling factor must be nonzero")]
    ZeroScale,
    #[error("isotropic vector")]
    Isotropic,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unrecognized root system: {0}")]
    UnrecognizedRootSystem(String),
    #[error("subcase required for {0}")]
    SubcaseRequired(String),
    #[error("coefficient conflict at {0}")]
    CoefficientConflict(String),
    #[error("weight is symbolic; solve it first")]
    SymbolicWeight,
    #[error("missing coefficients: {}", .0.join(", "))]
    MissingCoefficients(Vec<String>),
    #[error("dual roots do not span: {0}")]
    NotSpanning(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("wrong number of forms: expected {expected}, got {got}")]
    FormCount { expected: usize, got: usize },
    #[error("series vanishes to rectangle order")]
    VanishesToRectangleOrder,
    #[error("meromorphic toric factor (1 - zeta^l)^{0} with l < 0")]
    MeromorphicToric(i64),
    #[error("term cap exceeded ({0} terms)")]
    TermCap(usize),
    #[error("exponent {0} is not a multiple of 1/{1}")]
    Denominator(String, i64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
