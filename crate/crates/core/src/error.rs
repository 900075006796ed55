use thiserror::Error;

/// Errors raised by the constructions in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a group needs at least one cyclic factor")]
    EmptyGroup,

    #[error("cyclic factor orders must be >= 1, got {0:?}")]
    ZeroOrder(Vec<usize>),

    #[error("size {size} exceeds the configured cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("element or character {coords:?} does not belong to the group with orders {orders:?}")]
    GroupMismatch { orders: Vec<usize>, coords: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown leg label `{0}`")]
    UnknownLeg(String),

    #[error("duplicate leg label `{0}`")]
    DuplicateLeg(String),

    #[error("leg `{0}` has dimension 0")]
    EmptyLeg(String),

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("invalid spectral representation: {0}")]
    InvalidRepresentation(String),

    #[error("probe operator {0} is not diagonal in the character basis")]
    NotDiagonal(usize),

    #[error("memory budget exceeded: {needed} amplitudes requested, budget is {budget}")]
    MemoryBudget { needed: usize, budget: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
