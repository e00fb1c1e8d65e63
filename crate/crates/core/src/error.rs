use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),
    #[error("budget of {budget} exhausted before a result was found")]
    BudgetExhausted { budget: u64 },
    #[error("lattice side N = {0} is below 2")]
    LatticeTooSmall(u32),
    #[error("lattice side N = {n} exceeds the limit {max}")]
    LatticeTooLarge { n: u32, max: u32 },
    #[error("pair class ({a}, {b}) is not valid for N = {n}")]
    InvalidClass { a: u32, b: u32, n: u32 },
    #[error("point ({x}, {y}) lies outside the {n}x{n} lattice")]
    PointOutOfRange { x: u32, y: u32, n: u32 },
    #[error("point ({x}, {y}) is already in the subset")]
    DuplicatePoint { x: u32, y: u32 },
    #[error("point ({x}, {y}) is not in the subset")]
    MissingPoint { x: u32, y: u32 },
    #[error("{kind} requires odd N, got N = {n}")]
    ParityViolation { kind: &'static str, n: u32 },
    #[error("filled perimeter depth {depth} outside 1..={max}")]
    DepthOutOfRange { depth: u32, max: u32 },
    #[error("checkerboard axis distance a = {0} must be even")]
    OddAxisDistance(u32),
    #[error("subset size {p} exceeds the limit {max}")]
    SubsetTooLarge { p: usize, max: usize },
    #[error("subset size {p} outside 1..={max}")]
    InvalidSubsetSize { p: u64, max: u64 },
    #[error("the error of an empty subset is the empty-subset constant, not a ratio")]
    EmptySubset,
    #[error("no closed-form bound for configuration {0}")]
    UnsupportedKind(&'static str),
    #[error("points belong to a {found}x{found} lattice, expected {expected}x{expected}")]
    LatticeMismatch { expected: u32, found: u32 },
}
