use alloc::string::String;
use core::fmt;

/// Everything that can go wrong inside the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A structural invariant of an input does not hold.
    Validation(String),
    /// Input sequence too short for the requested operation.
    TooShort { needed: usize, got: usize },
    /// Two inputs that must agree in length or width do not.
    DimensionMismatch { expected: usize, got: usize },
    /// No gait peaks found in a foot signal.
    NoGait,
    /// Heel strikes and toe-offs did not alternate after detection.
    IrregularGait(String),
    /// A requested interval lies outside the recorded span.
    OutOfSpan { start: f64, end: f64 },
    /// An iterative solver stopped at its cap before reaching tolerance.
    NonConvergence { iterations: usize, gap: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(msg) => write!(f, "{msg}"),
            Error::TooShort { needed, got } => {
                write!(f, "sequence too short: need more than {needed} samples, got {got}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NoGait => write!(f, "no gait detected"),
            Error::IrregularGait(msg) => write!(f, "irregular gait: {msg}"),
            Error::OutOfSpan { start, end } => {
                write!(f, "interval [{start}, {end}) outside recorded span")
            }
            Error::NonConvergence { iterations, gap } => {
                write!(f, "solver did not converge after {iterations} iterations (gap {gap:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
