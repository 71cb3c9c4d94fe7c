use std::fmt;

use jdlg::Error;

pub const OK: u8 = 0;
pub const NOT_ADMISSIBLE: u8 = 2;
pub const NOT_POWER_BOUNDED: u8 = 3;
pub const UNDECIDED: u8 = 4;
pub const MALFORMED: u8 = 5;

/// A run that stopped early, with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn malformed(message: impl Into<String>) -> Self {
        Self {
            code: MALFORMED,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::MultipleIdempotents { .. } | Error::KernelNotGroup | Error::NotAGroup(_) => NOT_ADMISSIBLE,
        Error::NotPowerBounded(_) => NOT_POWER_BOUNDED,
        Error::NonSquare { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFinite(_)
        | Error::NonAssociative { .. }
        | Error::OutOfRange { .. }
        | Error::MalformedParameters(_) => MALFORMED,
        Error::BoundaryCollision { .. }
        | Error::BudgetExhausted(_)
        | Error::NoConvergence(_)
        | Error::NoneFound { .. }
        | Error::MethodDisagreement(_)
        | Error::NotPositiveDefinite(_)
        | Error::CommutantSolveFailure(_)
        | Error::SpanDeficiency { .. } => UNDECIDED,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;
