use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a nonnegative extended real")]
    InvalidScalar(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("action {action} is not feasible at state {state:?}")]
    InfeasibleAction { state: String, action: usize },

    #[error("value function has no entry for state index {state}")]
    MissingValue { state: usize },

    #[error("objective takes -inf or NaN at state {state:?}")]
    NegativeInfinity { state: String },

    #[error("fallback action is not feasible at state {state:?}")]
    FallbackInfeasible { state: String },

    #[error("discount factor {0} outside [0, 1]")]
    DiscountOutOfRange(f64),

    #[error("tolerance-based stopping is unavailable: {0}; use a fixed iteration budget or structural evaluation")]
    NoContraction(&'static str),

    #[error("value iteration did not reach the stopping threshold within {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("Bellman residual {residual:e} at state {state:?} exceeds tolerance {tol:e}")]
    ResidualTooLarge { state: String, residual: f64, tol: f64 },

    #[error("model is truncated: minimising over it needs an infimum-witness certificate")]
    MissingWitness,

    #[error("invalid discount grid: {0}")]
    InvalidGrid(String),

    #[error("no grid point at or above beta = {0}")]
    NoGridPoint(f64),

    #[error("every state has infinite discounted value at alpha = {0}")]
    InfiniteOptimalValue(f64),

    #[error("{count} stationary policies exceed the enumeration cap {cap}")]
    TooManyPolicies { count: u128, cap: u128 },

    #[error("branch length n* = {n_star} exceeds the cap {cap}")]
    BranchTooLong { n_star: u64, cap: u64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
