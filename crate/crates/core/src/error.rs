use thiserror::Error;

use crate::closure::ClosureNet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("eigenvalue of modulus {modulus} is ambiguous against the spectral boundary {boundary}")]
    BoundaryCollision { modulus: f64, boundary: f64 },

    #[error("representation is not power-bounded: {0}")]
    NotPowerBounded(String),

    #[error("closure saturation exhausted its budget with {} elements", .0.elements.len())]
    BudgetExhausted(Box<ClosureNet>),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("minimal idempotents disagree (distance {distance:e}); the closure is not admissible")]
    MultipleIdempotents { distance: f64 },

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("table is not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NonAssociative { a: usize, b: usize, c: usize },

    #[error("table entry at ({row}, {col}) is {value}, outside 0..{order}")]
    OutOfRange {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },

    #[error("the kernel of the semigroup is not a group")]
    KernelNotGroup,

    #[error("invariant form is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("commutant solve failed: {0}")]
    CommutantSolveFailure(String),

    #[error("unitary systems span dimension {found}, expected {expected}")]
    SpanDeficiency { expected: usize, found: usize },

    #[error("no approximate power idempotent within the search bound (best defect {best:e} at n = {n})")]
    NoneFound { n: usize, best: f64 },

    #[error("methods disagree: {0}")]
    MethodDisagreement(String),

    #[error("malformed parameters: {0}")]
    MalformedParameters(String),
}
