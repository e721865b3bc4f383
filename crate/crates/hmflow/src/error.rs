use thiserror::Error;

/// Errors surfaced by the library. Each variant corresponds to a typed
/// failure mode of one of the numerical operations.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 32")]
    BadGridSize(usize),
    #[error("field length {got} does not match grid size {want}")]
    SizeMismatch { got: usize, want: usize },
    #[error("window has no nodes")]
    EmptyWindow,
    #[error("vector of length {got} is not unit norm (deviation {dev:.3e})")]
    NotUnit { got: usize, dev: f64 },
    #[error("matrix is not orthogonal (deviation {0:.3e})")]
    NotOrthogonal(f64),
    #[error("chart frame is not orthonormal (deviation {0:.3e})")]
    BadChart(f64),
    #[error("point is within tolerance of the projection south pole (u_last = {0:.6})")]
    SouthPoleSingularity(f64),
    #[error("adjacent angle jump {0:.4} rad is not resolvable on this grid")]
    UnresolvableWinding(f64),
    #[error("no dominant Fourier mode: |a_N| = {0:.3e} < 1e-6")]
    DegenerateMode(f64),
    #[error("windowed Gram matrix is numerically singular (min eigenvalue {0:.3e} < 1e-14)")]
    SingularGram(f64),
    #[error("blow-up detected at t = {time:.6}: {what}")]
    BlowupDetected { time: f64, what: String },
    #[error("least-squares system too ill-conditioned (cond = {0:.3e} > 1e14)")]
    IllConditioned(f64),
    #[error("stage {stage} entry condition failed: |v| = {norm:.3e} > {threshold:.3e}")]
    ScheduleExhausted { stage: usize, norm: f64, threshold: f64 },
    #[error("crossing failed: terminal energy {achieved:.6} >= level {level:.6}")]
    CrossingFailed { achieved: f64, level: f64, delta_e: f64 },
    #[error("polar state winding {got} does not match requested target winding {want}")]
    DegreeMismatch { got: i64, want: i64 },
    #[error("winding change requires sphere dimension k >= 2 (got k = {0})")]
    DimensionTooSmall(usize),
    #[error("no admissible stereographic pole keeps both curves at distance >= 0.1")]
    PoleOnCurve,
    #[error("energy target {target:.4} unreachable with mode cap {mode_cap}")]
    EnergyUnreachable { target: f64, mode_cap: usize },
    #[error("descent exceeded the maximum level budget {0}")]
    DescentBudgetExceeded(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
