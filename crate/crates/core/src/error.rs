use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shift parameters leave D at axis j={axis}: p^2 + |q|^2 = {value}")]
    ShiftConstraint { axis: usize, value: f64 },

    #[error("coin vector {name} is not normalized: |{name}| = {norm}")]
    CoinNormalization { name: &'static str, norm: f64 },

    #[error("coin assumption violated: {0}")]
    CoinAssumption(String),

    #[error("exponent {value} exceeds the overflow cap {cap}; reduce delta or L")]
    Overflow { value: f64, cap: f64 },

    #[error("operator is not unitary: max |U^*U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("operator propagates by {measured} > declared b = {declared}")]
    PropagationExceeded { measured: f64, declared: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("power iteration did not converge in {iterations} iterations (last relative change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("essential spectrum sample set is empty")]
    EmptyArcs,

    #[error("eigenvalue is not isolated: d(lambda) = {0}")]
    NotIsolated(f64),

    #[error("decay fit needs at least {needed} usable shells, found {found}")]
    TooFewShells { needed: usize, found: usize },

    #[error("decay hypothesis violated: 2 sinh(delta b) = {lhs} >= d(lambda) = {d_lambda}")]
    Hypothesis { lhs: f64, d_lambda: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
