use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum WsqError {
    #[error("invalid parameter {name}={value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A request past the overflow horizon. Never silently wrapped.
    #[error("index {requested} beyond overflow horizon {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },

    /// Log-convexity was required but the quotients decrease at `p`.
    #[error("sequence is not log-convex at p={p}: log m_{p} = {at} < log m_{prev_p} = {prev}")]
    NotLogConvex {
        p: usize,
        at: f64,
        prev_p: usize,
        prev: f64,
    },

    #[error("empty quotient table")]
    EmptyTable,

    #[error("explicit table rows must be contiguous from p=0; row {row} has p={got}, expected {expected}")]
    NonContiguousTable {
        row: usize,
        got: u64,
        expected: u64,
    },

    /// h_M(t) bracketing ran past the horizon; carries the partial inf over
    /// the available pieces so the caller never sees a silently wrong value.
    #[error("t={t} too small: bracketing piece beyond horizon {horizon}; partial log h = {partial_log_h}")]
    AssocBeyondHorizon {
        t: f64,
        horizon: usize,
        partial_log_h: f64,
    },

    #[error("growth control not strictly increasing on verification grid near t={t}")]
    GrowthControlNotIncreasing { t: f64 },

    #[error("node generator `{tag}` does not certify sup p_(j+1)/p_j = infinity")]
    NodeRatioNotDivergent { tag: String },

    #[error("series reciprocal needs G(0) != 0")]
    ZeroConstantTerm,

    #[error("moment tail not certifiable below eps={eps} within horizon (best relative bound {best})")]
    TailNotCertified { eps: f64, best: f64 },

    #[error("spec parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, WsqError>;
