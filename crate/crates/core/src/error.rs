use thiserror::Error;

use crate::constructions::RangeClass;

/// Errors raised by the library.
///
/// Variants split into two families: precondition failures (bad input,
/// out-of-range parameters, unmet hypotheses), which the CLI reports with
/// exit code 2, and internal failures (I/O, serialization), exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ambient mismatch: expected P^{expected_m} x P^{expected_n}, got P^{got_m} x P^{got_n}")]
    AmbientMismatch {
        expected_m: usize,
        expected_n: usize,
        got_m: usize,
        got_n: usize,
    },

    #[error("monomial {monomial} has bidegree ({p},{q}), expected ({a},{b})")]
    WrongBidegree {
        monomial: String,
        p: i64,
        q: i64,
        a: i64,
        b: i64,
    },

    #[error("duplicate monomial in support: {0}")]
    DuplicateMonomial(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("coefficient matrix has rank {rank}, expected full row rank {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("linear system is not basepoint-free: {0}")]
    NotBasepointFree(String),

    #[error("basepoint-freeness is not established for this system ({0})")]
    BasepointFreenessUnknown(String),

    #[error("exterior power index q={q} out of range 1..={max}")]
    WedgeOutOfRange { q: usize, max: usize },

    #[error("bundle rank {rank} exceeds the brute-force cap {cap}; use the degree-gap method")]
    RankCapExceeded { rank: usize, cap: usize },

    #[error("r={r} is not in the required range: classified as {class:?}")]
    OutOfRange { r: usize, class: RangeClass },

    #[error("construction unavailable: {0}")]
    ConstructionUnavailable(String),

    #[error("construction failed verification ({condition}); candidate: [{candidate}]")]
    ConstructionVerification { condition: String, candidate: String },

    #[error("checkpoint does not match task: {0}")]
    CheckpointMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the
    /// environment.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
