use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("conformal factor is not positive at r = {r} (value {value})")]
    NonPositiveFactor { r: f64, value: f64 },
    #[error("derivative unavailable: {0}")]
    DerivativeUnavailable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("step size underflow at {at}")]
    StepUnderflow { at: f64 },
    #[error("non-finite state at {at}")]
    NonFinite { at: f64 },
    #[error("no sign change on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },
    #[error("relaxation stagnated with residual {residual:e}")]
    Stagnation { residual: f64 },
    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("curvature blow-up: |H| dt = {value:e}")]
    CurvatureBlowUp { value: f64 },
    #[error("curve self-intersects between segments {i} and {j}")]
    SelfIntersection { i: usize, j: usize },
    #[error("solution lost positivity at step {step}")]
    Positivity { step: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;

impl From<std::io::Error> for GeoError {
    fn from(e: std::io::Error) -> Self {
        GeoError::Io(e.to_string())
    }
}
