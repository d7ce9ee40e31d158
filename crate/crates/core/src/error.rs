use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table limit must be at least 1")]
    InvalidLimit,

    #[error("table limit {requested} exceeds the supported ceiling {ceiling}")]
    LimitTooLarge { requested: usize, ceiling: usize },

    #[error("unknown arithmetic function `{0}`")]
    UnknownFunction(String),

    #[error("tables have mismatched limits ({left} vs {right})")]
    LimitMismatch { left: usize, right: usize },

    #[error("argument {value} needs tables up to {needed}, but they stop at {limit}")]
    TableTooSmall { value: String, needed: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("x = {0} is not of the form [x] + 1/2")]
    NotHalfInteger(String),

    #[error("zeta has a pole at s = 1")]
    Pole,

    #[error("cannot parse `{0}` as a rational number")]
    BadRational(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedZeroLine { line: usize, message: String },

    #[error("zero ordinates must increase strictly; entry {index} ({value}) does not")]
    NonIncreasingOrdinates { index: usize, value: String },

    #[error("first ordinate {0} lies outside the sanity window [14.1, 14.2]")]
    FirstOrdinateOutOfWindow(String),

    #[error("entry {index}: |zeta(1/2 + i*{gamma})| = {modulus} is not below 1e-6")]
    NotAZero {
        index: usize,
        gamma: String,
        modulus: String,
    },

    #[error("entry {index}: zeta'(rho) vanishes, the zero at {gamma} is not simple")]
    MultipleZero { index: usize, gamma: String },

    #[error("entry {index}: file value of zeta'(rho) differs from the computed one by relative {relative}")]
    ZetaPrimeMismatch { index: usize, relative: String },

    #[error("T = {t} lies beyond the zero table coverage t_max = {t_max}")]
    BeyondCoverage { t: String, t_max: String },

    #[error("regression file {path}: {message}")]
    Regression { path: PathBuf, message: String },
}
