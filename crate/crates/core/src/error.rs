use thiserror::Error;

/// Errors raised by the numerical engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("working precision of {0} digits is below the supported minimum of 16")]
    PrecisionTooLow(u32),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular at working precision (pivot {pivot:e} relative to row scale at step {step})")]
    Singular { step: usize, pivot: f64 },

    #[error("design matrix is rank deficient (column {column}, relative diagonal {ratio:e})")]
    RankDeficient { column: usize, ratio: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("intermediate value overflows the exponent range of the context: {0}")]
    Overflow(String),

    #[error("primitive function is not intermediate-normalized: <phi0|phi> = {0:e}")]
    NotIntermediateNormalized(f64),

    #[error("exchange formula denominator {0:e} is below the singularity guard")]
    Singularity(f64),

    #[error("localization failure: left half-space norm {left:e} is below a quarter of the total {total:e}")]
    Localization { left: f64, total: f64 },

    #[error("local energy undefined: |psi| = {0:e} is below the division guard")]
    VanishingWavefunction(f64),

    #[error("Levin transform: increment {0} is zero")]
    ZeroIncrement(usize),

    #[error("Levin transform: denominator is degenerate ({0:e} relative to its terms)")]
    DegenerateDenominator(f64),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
