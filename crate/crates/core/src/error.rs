use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("could not produce a {k}-covered deployment of {n} sensors after {attempts} attempts")]
    CoverageUnachievable { n: usize, k: u32, attempts: usize },

    #[error("subregion with signature {signature:?} is covered by {covering} sensors, fewer than k = {k}")]
    UnderCovered {
        signature: Vec<u32>,
        covering: usize,
        k: u32,
    },

    #[error("malformed instance file: {0}")]
    Malformed(String),

    #[error("schema version mismatch: expected {expected}, found {found}")]
    SchemaVersion { expected: u32, found: u32 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("sensor {0} appears more than once in the charging order")]
    RepeatedSensor(u32),

    #[error("unknown sensor id {0}")]
    UnknownSensor(u32),

    #[error("cycle detected in time-expanded graph")]
    CycleDetected,

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("broken predecessor chain at label {0}")]
    BrokenChain(usize),

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no action available from the depot")]
    NoActionAvailable,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
