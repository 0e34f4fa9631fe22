use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("inadmissible warping: {0}")]
    InadmissibleWarping(String),

    #[error("radius {r} outside the domain [0, {r_max}]")]
    Domain { r: f64, r_max: f64 },

    #[error("non-finite value while {0}")]
    NonFinite(String),

    #[error("eigensolver failed for n = {n}, r_max = {r_max}: {detail}")]
    Eigensolver { n: usize, r_max: f64, detail: String },

    #[error("quadrature did not converge: estimated error {achieved:e} above {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Newton stagnated at t = {t} after {iterations} iterations, residual {residual:e}")]
    NewtonStagnation { t: f64, iterations: usize, residual: f64 },

    #[error("linear solve failed at t = {t}: {detail}")]
    LinearSolve { t: f64, detail: String },

    #[error("boundary mass fraction {fraction:e} exceeds cap {cap:e} at t = {t}")]
    BoundaryContamination { t: f64, fraction: f64, cap: f64 },

    #[error("order violation {excess:e} at t = {t}, r = {r}")]
    OrderViolation { t: f64, r: f64, excess: f64 },

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
