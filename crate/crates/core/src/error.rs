use rug::Rational;

/// Errors reported by the library. Every variant names the violated
/// precondition so CLI front ends can surface it verbatim.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Derivative order exceeds the configured enumeration bound.
    #[error("derivative order k = {k} exceeds the maximum supported order {max}")]
    OrderOutOfBounds { k: u32, max: u32 },

    /// The evaluation point is an integer, where sin(pi x) vanishes.
    #[error("evaluation point x = {x} is an integer: sin(pi x) = 0 is a pole of every identity here")]
    IntegerEvalPoint { x: Rational },

    /// Division by a value that is exactly zero (for example g(x) = 0 in 1/g).
    #[error("pole: {what} is zero")]
    Pole { what: &'static str },

    /// The trigonometric prefactor vanishes at this (k, x), so the master
    /// identity cannot be solved for the power of pi there.
    #[error("degenerate point: the prefactor A_{k}({x}) vanishes (parity-induced zero); pick a different x")]
    DegeneratePoint { k: u32, x: Rational },

    /// A sequence argument is shorter than the operation requires.
    #[error("{what}: needs at least {needed} values, got {got}")]
    Arity {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// Requested floating-point precision below the supported minimum.
    #[error("precision_bits = {got} is below the minimum of {min} bits")]
    PrecisionTooLow { got: u32, min: u32 },

    /// Truncation radius too small for the tail bound to be meaningful.
    #[error("truncation radius N = {n} violates N > |x| + 1 for x = {x}")]
    RadiusTooSmall { n: u64, x: Rational },

    /// A closed-form derivative formula was invoked outside its validity range.
    #[error("{what}")]
    ContractViolation { what: &'static str },

    /// Two evaluation points that must differ coincide.
    #[error("evaluation points must differ: x = a = {x}")]
    CoincidentPoints { x: Rational },

    /// A caller-supplied numeric parameter is outside its documented range.
    #[error("invalid parameter: {what}")]
    InvalidParameter { what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
