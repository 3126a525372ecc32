use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("rank r must be at least 2, got {0}")]
    InvalidRank(i64),

    #[error("index n = {n} is out of range (need n >= {min})")]
    InvalidIndex { n: i64, min: i64 },

    #[error("position {pos} is outside [1, {len}]")]
    PositionOutOfRange { pos: usize, len: usize },

    #[error("positions {positions:?} are not free (forced positions cannot be chosen again)")]
    NotFree { positions: Vec<usize> },

    #[error("cannot parse word token {token:?}: {reason}")]
    ParseWord { token: String, reason: String },

    #[error("cannot parse coefficient {0:?}")]
    ParseCoeff(String),

    #[error("string entry {entry} is neither r-1 nor r for r = {r}")]
    InvalidExcEntry { entry: i64, r: i64 },

    #[error("size {count} exceeds the cap of {cap}")]
    CapExceeded { count: String, cap: u64 },

    #[error("{0} positions do not fit a 64-bit position set")]
    TooManyPositions(usize),

    #[error("division is not exact: {0}")]
    InexactDivision(String),

    #[error("two-row word rows disagree in length: alpha has {alpha}, beta has {beta}")]
    RowMismatch { alpha: usize, beta: usize },

    #[error("exponent overflow")]
    ExponentOverflow,
}
