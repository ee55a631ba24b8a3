use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} is not an odd prime")]
    InvalidPrime(u64),

    #[error("element is not a unit (residue divisible by p)")]
    NotAUnit,

    #[error("precision exhausted: need {needed} digits, have {available}")]
    PrecisionExhausted { needed: u32, available: u32 },

    #[error("residue is not divisible by p^{0}")]
    NotDivisible(u32),

    #[error("vector is outside the chart ball (some coordinate is a unit)")]
    OutOfChart,

    #[error("argument outside the operation's domain: {0}")]
    OutOfDomain(String),

    #[error("fixed-point iteration stopped contracting at step {step}")]
    NonContraction { step: usize },

    #[error("limit failed to stabilize after {steps} steps")]
    ConvergenceFailure { steps: u32 },

    #[error("basis is singular modulo p")]
    SingularBasis,

    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Errors caused by malformed input rather than by the mathematics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::PrimeMismatch(..)
                | Error::DimensionMismatch { .. }
                | Error::InvalidPrime(_)
                | Error::Usage(_)
        )
    }
}
