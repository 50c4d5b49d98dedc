use thiserror::Error;

/// Every failure the toolkit reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has no states")]
    Empty,
    #[error("negative entry at ({row}, {col}): {value}")]
    NegativeEntry { row: usize, col: usize, value: String },
    #[error("entry at ({row}, {col}) exceeds 1: {value}")]
    EntryAboveOne { row: usize, col: usize, value: String },
    #[error("row {row} sums to {sum} (deviation {deviation} from 1)")]
    RowSumNotOne { row: usize, sum: String, deviation: String },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not a probability distribution: {0}")]
    BadDistribution(String),
    #[error("state {state} never returns to itself")]
    NoReturnPath { state: usize },
    #[error("chain is not absorbing: state {state} cannot reach an absorbing state")]
    NotAbsorbing { state: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("chain is not irreducible")]
    NotIrreducible,
    #[error("stationary equations do not have a unique solution")]
    DegenerateNullSpace,
    #[error("state {state} has zero stationary mass")]
    ZeroMass { state: usize },
    #[error("chain is not reversible: pair ({0}, {1}) violates detailed balance")]
    NotReversible(usize, usize),
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("proposal set is empty")]
    EmptyProposalSet,
    #[error("site {0} is outside the lattice")]
    BadSite(usize),
    #[error("configuration has a single spin value; no exchange is possible")]
    UniformConfig,
    #[error("bad distance matrix: {0}")]
    BadDistanceMatrix(String),
    #[error("bad interval ({s}, {t}] for horizon {horizon}")]
    BadInterval { s: f64, t: f64, horizon: f64 },
    #[error("horizons differ: {0} vs {1}")]
    HorizonMismatch(f64, f64),
    #[error("duplicate event time {0}")]
    Collision(f64),
    #[error("diagonal entry {row} is {value}, expected minus the off-diagonal row sum")]
    BadDiagonal { row: usize, value: String },
    #[error("negative rate at ({row}, {col}): {value}")]
    NegativeRate { row: usize, col: usize, value: String },
    #[error("generator row {row} sums to {sum}, expected 0")]
    RowSumNotZero { row: usize, sum: String },
    #[error("uniformization needs more than {cap} terms for tolerance {tol}")]
    ToleranceUnachievable { cap: usize, tol: f64 },
    #[error("normalizing series diverges")]
    DivergentNormalizer,
    #[error("queue is unstable: {0}")]
    StabilityError(String),
    #[error("truncation cap {cap} leaves tail mass {tail:e}")]
    CapTooSmall { cap: usize, tail: f64 },
    #[error("insufficient data: {found} samples, need {needed}")]
    InsufficientData { found: usize, needed: usize },
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
