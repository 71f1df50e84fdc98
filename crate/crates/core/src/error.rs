use alloc::string::String;

/// Errors raised by the numerical kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),
    #[error("point lies outside the closed domain")]
    OutsideDomain,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("coefficient field fails the ellipticity check (eigenvalue {eigenvalue} at node {node})")]
    UnverifiedCoefficients { node: usize, eigenvalue: f64 },
    #[error("singular or non-factorizable system (pivot {pivot} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },
    #[error("gradient vanishes; the Poincare ratio is undefined")]
    ZeroGradient,
    #[error("function is not in the test class: {0}")]
    NotInTestClass(String),
    #[error("obstacle exceeds boundary data on the Kolmogorov boundary at node {node} (psi - g = {excess})")]
    OrderingViolation { node: usize, excess: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("iteration limit {iterations} reached with residual {residual}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("inadmissible competitor: {0}")]
    InadmissibleCompetitor(String),
    #[error("invalid sampling request: {0}")]
    InvalidSampling(String),
    #[error("regression basis is rank deficient even at degree 1")]
    RankDeficient,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
