use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bad magic bytes: expected \"VDS1\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("file truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("malformed dataset file: {0}")]
    Format(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("space mismatch: {left:?} vs {right:?}; both datasets must live in the same vector space")]
    SpaceMismatch { left: crate::vecstore::SpaceTag, right: crate::vecstore::SpaceTag },

    #[error("k_max={k} requires at least {required} rows, dataset has {count}")]
    TooFewRows { k: usize, required: usize, count: usize },

    #[error("duplicate rows: {0} exact duplicate pair(s), first at indices {1:?}")]
    DuplicateRows(usize, (usize, usize)),

    #[error("duplicate distance: T_{0} is zero, log ratio undefined")]
    DuplicateDistance(usize),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Manifest(String),
}

pub type Result<T> = std::result::Result<T, Error>;
