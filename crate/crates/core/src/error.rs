use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: would produce {count} elements, cap is {cap}")]
    CapExceeded { what: &'static str, count: BigUint, cap: u64 },
    #[error("grid of {total} nodes exceeds the cap of {cap}; use a heuristic (uncertified) grid with a smaller K")]
    GridTooLarge { total: BigUint, cap: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("certificate violated on the {side} side: {detail}")]
    CertificateViolated { side: &'static str, detail: String },
    #[error("index {0:?} has a negative entry; analytic index required")]
    NonAnalytic(Vec<i32>),
    #[error("table length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension {n} is too large for {what} (limit {limit})")]
    TooLarge { what: &'static str, n: usize, limit: usize },
    #[error("family mismatch: {0}")]
    Mismatch(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
