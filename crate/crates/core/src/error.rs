use crate::Complex;
use thiserror::Error;

/// Errors raised by the geometry engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum WkbError {
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("root finder did not converge at x = {x} (coefficients {coeffs:?})")]
    RootFinding { x: Complex, coeffs: Vec<Complex> },

    #[error("discriminant vanishes identically; the symbol has a repeated factor in xi")]
    DegenerateSymbol,

    #[error("path passes within {clearance} of the turning point at {tp}")]
    TooCloseToTurningPoint { tp: Complex, clearance: f64 },

    #[error("root matching stayed ambiguous at the minimum step near x = {x}")]
    AmbiguousMatching { x: Complex },

    #[error("step size underflow while tracing near x = {x}")]
    StepUnderflow { x: Complex },

    #[error("degenerate seed at {tp}: leading local coefficient {magnitude:e} below tolerance")]
    DegenerateSeed { tp: Complex, magnitude: f64 },

    #[error("degenerate connection integral (|V| = {0:e})")]
    DegenerateConnection(f64),

    #[error("continuation failed at t = {t}: {reason}")]
    Continuation { t: Complex, reason: String },

    #[error("no solutions found for the algebraic system at t = {0}")]
    NoSolutions(Complex),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, WkbError>;
