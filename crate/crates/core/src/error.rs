use thiserror::Error;

/// Errors raised by the detection pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series has n = {n} time points but M = {m} needs at least {required}")]
    DimensionTooSmall { n: usize, m: usize, required: usize },

    #[error("non-finite value at time {time}, coordinate {coord}")]
    NonFiniteEntry { time: usize, coord: usize },

    #[error("time index {t} outside 1..={max}")]
    IndexOutOfRange { t: usize, max: usize },

    #[error("dependence design is numerically singular (n = {n}, M = {m}, condition number {condition:e})")]
    SingularDesign { n: usize, m: usize, condition: f64 },

    #[error("no admissible index tuples for the {term} term (n = {n}, separation {gap})")]
    EmptySumRange { term: &'static str, n: usize, gap: usize },

    #[error("lag energy baseline w(0) = {0} is not positive")]
    NonPositiveBaseline(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
