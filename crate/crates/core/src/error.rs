use thiserror::Error;

/// Errors raised by the solvers, samplers and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution parameters: {0}")]
    InvalidParameters(String),

    #[error("support exhausted: F({x}) = 1, hazard undefined")]
    SupportExhausted { x: f64 },

    #[error("grid step too coarse: implicit diagonal 1 - f(0)h/2 = {diagonal} <= 0")]
    StepTooCoarse { diagonal: f64 },

    #[error("incompatible grids: step {left_step}/{left_count} vs {right_step}/{right_count}")]
    IncompatibleGrids {
        left_step: f64,
        left_count: usize,
        right_step: f64,
        right_count: usize,
    },

    #[error("measure not normalized: mass {mass} deviates from 1")]
    NotNormalized { mass: f64 },

    #[error("time {t} exceeds the renewal-measure horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no uniform component found up to convolution power {n_max}")]
    NoComponentFound { n_max: usize },

    #[error("negative H: F^(*n0) - G0 has density {value} at x = {x}")]
    NegativeH { x: f64, value: f64 },

    #[error("no common component: best delta {delta} < 0.01")]
    NoCommonComponent { delta: f64 },

    #[error("thinning probability {probability} exceeds one at ({beta}, {beta_hat})")]
    ThinningProbabilityExceedsOne { probability: f64, beta: f64, beta_hat: f64 },

    #[error("insufficient points for a slope fit: {usable} usable, 5 required")]
    InsufficientPoints { usable: usize },

    #[error("statistic requires unbounded cycle-maximum support, {0} has finite support")]
    FiniteSupport(String),

    #[error("operation requires a zero-delayed path (delay = {delay})")]
    NotZeroDelayed { delay: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
