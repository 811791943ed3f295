//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A scaling scheme produced a negative Poisson rate at the requested
    /// sequence index. Rates are never clamped; the index is simply too
    /// small for the given drift/variance combination.
    #[error("negative rate for {stream} at n={n}: {rate}")]
    NegativeRate { stream: String, n: u64, rate: f64 },

    /// A matrix handed to the Cholesky factorization has a pivot below the
    /// negativity tolerance and is not positive semi-definite.
    #[error("matrix is not positive semi-definite: pivot {pivot:.3e} at column {col}")]
    NotPsd { col: usize, pivot: f64 },

    /// Time argument outside the simulated range.
    #[error("time {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    /// An event-driven simulation exceeded its event budget.
    #[error("event budget of {budget} exceeded")]
    EventBudgetExceeded { budget: u64 },

    /// A stop condition that permits zero complete windows.
    #[error("stop condition permits no complete window: {0}")]
    StopTooSmall(String),

    /// The process can never produce another event or crossing and no
    /// horizon bounds the run.
    #[error("simulation cannot progress (no events, no crossings possible) and no horizon is set")]
    Stalled,

    /// Bridge correction requested for a component whose noise variance
    /// vanishes while its boundary is finite.
    #[error("bridge correction needs a positive noise variance: component {component} has zero diagonal")]
    NonPositiveDiagonal { component: usize },

    /// Estimator called with an empty sample.
    #[error("empty sample{}", if .0.is_empty() { String::new() } else { format!(": {}", .0) })]
    EmptySample(String),

    /// Estimator needs more replications than provided.
    #[error("need at least {needed} replications, got {got}")]
    InsufficientReplications { needed: usize, got: usize },

    /// Network description failed validation.
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),

    /// A pluggable scaling scheme violated the admissibility conditions.
    #[error("scaling scheme violates admissibility: {0}")]
    SchemeViolation(String),

    /// Config file could not be parsed or validated.
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),

    /// Malformed serialized path or train file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
