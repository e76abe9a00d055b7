use thiserror::Error;

/// Errors raised by the numerical core (measures, increments, schemes, couplings).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment of order {order} diverges for this measure")]
    InfiniteMoment { order: f64 },

    #[error("no jump mass at or below eps = {eps}; Gaussian compensation is degenerate")]
    DegenerateSmallJumps { eps: f64 },

    #[error("no jump mass above eps = {eps}; the tail law is empty")]
    EmptyTail { eps: f64 },

    #[error("the Levy measure has infinite total mass; exact increments are not available")]
    InfiniteActivity,

    #[error(
        "small jumps below eps = {eps} have infinite activity and cannot be simulated exactly; \
         use an inner-truncation small-jump model or a finite-activity driver"
    )]
    NeedsFiniteSmallActivity { eps: f64 },

    #[error("need at least {needed} increments, got {got}")]
    InsufficientIncrements { needed: usize, got: usize },

    #[error("path grids differ: {0}")]
    GridMismatch(String),

    #[error("empirical CDF has no samples")]
    EmptyCdf,

    #[error("empty input sample")]
    EmptyInput,

    #[error("coupled increment stream exhausted after {available} steps, {needed} required")]
    StreamExhausted { needed: usize, available: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
}

pub type Result<T> = std::result::Result<T, LevyError>;
