use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("weight mismatch: {left} vs {right}")]
    WeightMismatch { left: u32, right: u32 },

    #[error("invalid Fourier index [{a}, {b}, {c}]: not positive semi-definite")]
    InvalidIndex { a: i64, b: i64, c: i64 },

    #[error("index of trace {trace} exceeds the trace bound {bound}")]
    TraceOutOfRange { trace: u32, bound: u32 },

    #[error("{0} is not a fundamental discriminant")]
    NonFundamentalDiscriminant(i64),

    #[error("Jacobi table covers discriminants up to {available}, but {needed} is required")]
    InsufficientCoverage { needed: u64, available: u64 },

    #[error("unsupported weight {0} for this construction")]
    UnsupportedWeight(u32),

    #[error("division by a box containing zero")]
    DivisionByZero,

    #[error("square root of a box with negative part")]
    NegativeSqrt,

    #[error("cannot certify that the imaginary part is positive definite")]
    NotPositiveDefinite,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("precision exhausted: box radius exceeds the requested tolerance ({0})")]
    PrecisionExhausted(String),

    #[error("precision ceiling of {0} bits reached without meeting the target")]
    PrecisionCeiling(u32),

    #[error("value is likely zero: no separation from 0 after {0} refinement steps")]
    LikelyZero(u32),

    #[error("the denominator F(Z) cannot be separated from zero; choose another evaluation point")]
    DenominatorContainsZero,

    #[error("summand for coset #{index} failed certification: {reason}")]
    SummandFailed { index: usize, reason: String },

    #[error("term {term} has weight {found}, expected {expected}")]
    NonHomogeneous { term: usize, found: u32, expected: u32 },

    #[error("root box contains {0} roots of the defining polynomial (exactly one required)")]
    RootIsolation(usize),

    #[error("root isolation could not be certified: {0}")]
    RootCertification(String),

    #[error("interval Newton failed to contract the root box")]
    NewtonStalled,

    #[error("invalid eigenform specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
