use thiserror::Error;

/// Errors surfaced by the library. Messages are stable; the CLI prints them verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("zero-probability condition: Pr[v >= {0}] = 0")]
    ZeroProbabilityCondition(f64),

    #[error("non-monotone schedule: {0}")]
    NonMonotoneSchedule(String),

    #[error("mechanism requires independence (joint prior given)")]
    RequiresIndependence,

    #[error("values must be at least v = {0}")]
    ValuesBelowFloor(f64),

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("instance too large for the LP benchmark: {profiles} profiles (limit {limit})")]
    InstanceTooLarge { profiles: usize, limit: usize },

    #[error("zero benchmark revenue")]
    ZeroBenchmark,

    #[error("infeasible grid: {0}")]
    InfeasibleGrid(String),

    #[error("lp solver failed: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
