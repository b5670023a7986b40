use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GbcError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point {point:?} is within {margin} of the boundary of chart `{chart}`")]
    ChartBoundary {
        chart: String,
        point: Vec<f64>,
        margin: f64,
    },
    #[error("chart mismatch: expected `{expected}`, found `{found}`")]
    ChartMismatch { expected: String, found: String },
    #[error("Pfaffian requires even size, got {0}")]
    OddRank(usize),
    #[error("matrix is not antisymmetric (residual {0:e})")]
    NotAntisymmetric(f64),
    #[error("exponent has an odd-degree component of size {0:e}")]
    OddExponent(f64),
    #[error("scale parameter must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("Gaussian moment diverges for width {0} on an infinite interval")]
    Divergent(f64),
    #[error("point is off the sphere bundle (|x| = {0})")]
    OffSphereBundle(f64),
    #[error("point outside the open unit ball (|y| = {0})")]
    OutsideBall(f64),
    #[error("modulus must be positive, got {0}")]
    InvalidModulus(f64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(f64, f64),
    #[error("chain is not admissible: {0}")]
    Inadmissible(String),
    #[error("section vanishes on the cycle (min norm {0:e})")]
    VanishingSection(f64),
    #[error("invalid decomposition: witness residual {0:e}")]
    InvalidDecomposition(f64),
    #[error("chain is not a cycle: witness residual {0:e}")]
    NotACycle(f64),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported coefficient ring: {0}")]
    UnsupportedRing(String),
}

pub type Result<T, E = GbcError> = std::result::Result<T, E>;
