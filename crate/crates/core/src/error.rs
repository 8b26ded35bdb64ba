use thiserror::Error;

/// Errors raised by the calculus, model, forcing and solver layers.
///
/// Abscissae are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("integrator atom at {at} coincides with a jump of the integrand")]
    SharedDiscontinuity { at: f64 },

    #[error("function is undefined at the isolated point {at}")]
    UndefinedPoint { at: f64 },

    #[error("value at t = {t} is only defined almost everywhere (breakpoint)")]
    AeUndefined { t: f64 },

    #[error("t = {t} lies outside [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("function is required to be continuous but jumps at {at}")]
    NotContinuous { at: f64 },

    #[error("integrator is not monotonically increasing")]
    NonMonotone,

    #[error("mollifier width {eps} too large (ramps must fit inside the domain without overlapping)")]
    EpsilonTooLarge { eps: f64 },

    #[error("fixed-point iteration failed at step {step} (t = {t}): residual {residual} after {iterations} iterations")]
    PicardDivergence {
        step: usize,
        t: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("kernel atom at theta = {theta} meets the moving truncation boundary at t = {t}")]
    AtomAtTruncationBoundary { t: f64, theta: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
