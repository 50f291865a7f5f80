use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time {t} outside tabulated range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("scale factor collapsed to {s:.3e} at t = {t}")]
    SingularSolution { t: f64, s: f64 },

    #[error("{what}: residual {value:.3e} exceeds {limit:.1e} at t = {t}")]
    ToleranceFailure {
        what: &'static str,
        value: f64,
        limit: f64,
        t: f64,
    },

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("Hermite index {0} exceeds the supported maximum of 200")]
    IndexTooLarge(usize),

    #[error("kernel evaluated at a caustic (omega0 * dtau = {0})")]
    Caustic(f64),

    #[error("wavefunction does not vanish at the grid boundary (ratio {ratio:.3e})")]
    BoundaryLeak { ratio: f64 },

    #[error("bad grid specification: {0}")]
    BadGridSpec(String),

    #[error("tridiagonal solve broke down at row {0}")]
    LinearSolveFailure(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
