use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular parameterization at t = {t} (tangent magnitude {tau:e})")]
    SingularParameterization { t: f64, tau: f64 },

    #[error("inversion failed for point ({x}, {y})")]
    InversionFailed { x: f64, y: f64 },

    #[error("non-isolated characteristic points near t = {t}")]
    NonIsolatedCharacteristicPoints { t: f64 },

    #[error("strip arcs degenerate: trimming by {delta_trim} leaves no parameter range")]
    StripArcsDegenerate { delta_trim: f64 },

    #[error("strip too wide: R = {width} must be below {limit}")]
    StripTooWide { width: f64, limit: f64 },

    #[error("strip exceeds curvature radius: eta = {eta:e} at node (i = {i}, j = {j})")]
    StripExceedsCurvature { i: usize, j: usize, eta: f64 },

    #[error("coefficient bound violated at ({x}, {y}): a = {a}, b = {b}, alpha = {alpha}")]
    CoefficientBound {
        x: f64,
        y: f64,
        a: f64,
        b: f64,
        alpha: f64,
    },

    #[error("non-monotone row {row}: {reason}")]
    NonMonotoneRow { row: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("residual {residual:e} above tolerance {tolerance:e} (history: {history:?})")]
    ResidualTooLarge {
        residual: f64,
        tolerance: f64,
        history: Vec<f64>,
    },

    #[error("point ({x}, {y}) lies outside {what}")]
    OutsideDomain { x: f64, y: f64, what: &'static str },

    #[error("unknown problem id {0} (expected 1, 2 or 3)")]
    UnknownProblem(u32),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
