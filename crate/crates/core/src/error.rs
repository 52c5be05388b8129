use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid axes differ: {0}")]
    AxisMismatch(String),

    #[error("mode {label} is not unit-normalized (norm^2 = {norm_sq})")]
    NotNormalized { label: String, norm_sq: f64 },

    #[error("degenerate two-particle state (norm^2 = {norm_sq})")]
    DegenerateState { norm_sq: f64 },

    #[error("visibility undefined: max + min of the pattern is zero in the window")]
    UndefinedVisibility,

    #[error("fringe phase cannot be recovered: visibility {visibility} below 1e-3")]
    UnrecoverablePhase { visibility: f64 },

    #[error("pattern carries no fringe decomposition; generate it with detection_pattern")]
    MissingComponents,

    #[error("segment {segment} has non-positive duration {dt}")]
    TimeOrder { segment: &'static str, dt: f64 },

    #[error("grid under-resolved: {reason}; suggested dx <= {suggested_dx:.3e}")]
    GridUnderresolved { reason: String, suggested_dx: f64 },

    #[error("slit geometry: {0}")]
    Geometry(String),

    #[error("{role} must be unitary (max |U^dag U - 1| = {residual:.3e})")]
    NonUnitary { role: &'static str, residual: f64 },

    #[error("Gram matrix invalid: {0}")]
    InvalidGram(String),

    #[error("patterns are indistinguishable; phase cannot be read out")]
    UnreadablePhase,

    #[error("accuracy {best_accuracy} never reached confidence {confidence} within N <= {max_n}")]
    BudgetExceeded {
        best_accuracy: f64,
        confidence: f64,
        max_n: usize,
    },

    #[error("negative density {value:.3e} at x = {x}")]
    NegativeDensity { x: f64, value: f64 },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
