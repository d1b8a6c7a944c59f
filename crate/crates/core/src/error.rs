use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {x} lies outside the domain [0,1)")]
    Domain { x: f64 },

    #[error("point {x} is a boundary between branches; request a one-sided value by branch id")]
    BranchBoundary { x: f64 },

    #[error("branch {branch} has no point mapping to {y} (image is [{lo}, {hi}))")]
    OutsideImage { branch: usize, y: f64, lo: f64, hi: f64 },

    #[error("unknown branch id {0}")]
    UnknownBranch(usize),

    #[error("orbit of {x} did not return to Y within {cap} iterations")]
    Escape { x: f64, cap: usize },

    #[error("parameters are not Markov: {0}")]
    NonMarkov(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error("numerically singular system at omega={omega} (condition estimate {condition:e})")]
    Singular { omega: f64, condition: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("observable breaks conjugate symmetry at mode {0:?}")]
    SymmetryViolation(Vec<i32>),

    #[error("horizon {requested} exceeds the computed range {available}")]
    HorizonExceeded { requested: usize, available: usize },

    #[error("wrong measure regime: {0}")]
    Regime(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
