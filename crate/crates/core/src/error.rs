use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial {0:#x} is not primitive over GF(2^10) (cycle length {1})")]
    NonPrimitive(u32, usize),
    #[error("unsupported correction radius t = {0} (expected 1, 2 or 3)")]
    UnsupportedRadius(usize),
    #[error(
        "shortened length {n} is invalid for a code with {r} parity bits (need {r} < n <= 1023)"
    )]
    InvalidShortening { n: usize, r: usize },
    #[error("invalid map parameters: {0}")]
    InvalidMap(String),
    #[error("position ({row}, {col}) is not in the real set")]
    NotReal { row: i64, col: usize },
    #[error("row {row} has been evicted from the buffer (oldest retained row is {base})")]
    BufferUnderrun { row: i64, base: i64 },
    #[error("position ({row}, {col}) lies outside the retained window")]
    OutOfWindow { row: i64, col: usize },
    #[error("length mismatch: expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("configuration mismatch: {0}")]
    Config(String),
    #[error("infeasible rate {rate}: real width {mbar} must exceed parity count {r}")]
    InfeasibleRate { rate: f64, mbar: usize, r: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
