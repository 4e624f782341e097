use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("coordinate collision among sampled points")]
    Collision,

    #[error("{what} exceeds cap: {got} > {cap}")]
    CapExceeded { what: &'static str, cap: u64, got: u64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incompatible range partition: {0}")]
    IncompatiblePartition(String),

    #[error("gap mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("sampler depth fuse tripped at depth {0}")]
    DepthFuse(usize),

    #[error("pole of the falling factorial at n = {0}")]
    Pole(u64),

    #[error("numerical assertion failed: {0}")]
    Numerical(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Refusals (caps, validation) versus numerical assertion failures.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
