use thiserror::Error;

/// Errors raised across model construction, propagation and constraint checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coupling between states {0} and {1} given more than once")]
    DuplicateCoupling(usize, usize),

    #[error("coupling ({0}, {0}) lies on the diagonal")]
    DiagonalCoupling(usize),

    #[error("slopes of states {0} and {1} are degenerate")]
    DegenerateSlopes(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("connectivity graph is not bipartite, odd cycle {cycle:?}")]
    NotBipartite { cycle: Vec<usize> },

    #[error("index error: {0}")]
    IndexError(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ToleranceExceeded {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("evolution matrix entry reached {magnitude:.3e} at t = {time}")]
    Overflow { magnitude: f64, time: f64 },

    #[error("diagonal condition at index {index} violated by {residual:.3e}")]
    DiagonalConditionViolated { index: usize, residual: f64 },

    #[error("matrix is singular or not finite")]
    Singular,

    #[error("pure-gauge ansatz violated at ({row}, {col}): imaginary residual {residual:.3e}")]
    AnsatzViolated {
        row: usize,
        col: usize,
        residual: f64,
    },

    #[error("state {0} is not reachable through amplitudes above threshold")]
    DisconnectedGauge(usize),

    #[error("real part of cyclic product is too small ({0:.3e})")]
    DegenerateRealPart(f64),

    #[error("sign pattern {0:?} does not reduce to a known phase")]
    UnsupportedSignPattern([i8; 3]),
}

pub type Result<T> = std::result::Result<T, Error>;
