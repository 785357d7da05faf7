use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AflError {
    #[error("{0} is not an odd prime >= 5")]
    InvalidPrime(u32),
    #[error("precision {requested} outside supported range 1..={max} for p={p}")]
    PrecisionOutOfRange { p: u32, requested: u32, max: u32 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(&'static str),
    #[error("attempted to invert zero")]
    InvertZero,
    #[error("eta of zero is undefined")]
    EtaOfZero,
    #[error("mismatched prime or extension parameters")]
    MismatchedContext,
    #[error("matrix dimensions do not match")]
    DimensionMismatch,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("element is not regular semisimple")]
    NotRegularSemisimple,
    #[error("x lies on the Cayley divisor (det(kappa - x) = 0)")]
    OnDivisor,
    #[error("characteristic polynomial is not integral")]
    NonIntegralCharpoly,
    #[error("no residue kappa gives a unit det(kappa - x)")]
    NoUnitKappa,
    #[error("no norm-one residue lambda gives a unit det(lambda - gamma)")]
    NoUnitLambda,
    #[error("lambda must have norm one")]
    LambdaNotNormOne,
    #[error("kappa must be a unit")]
    KappaNotUnit,
    #[error("cannot satisfy sampling constraint: {0}")]
    UnsatisfiableConstraint(&'static str),
    #[error("degenerate parameters: {0}")]
    DegenerateParams(&'static str),
    #[error("called closed form for the wrong case")]
    WrongCase,
    #[error("orbital integral window too small: nonzero count at s={s}, t={t}")]
    WindowTooSmall { s: i32, t: i32 },
    #[error("level {level} not admissible at s={s}")]
    InvalidLevel { s: i64, level: i64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

pub type Result<T> = std::result::Result<T, AflError>;
