//! Real arithmetic of explicit binary precision, special functions, and
//! named mathematical constants.
//!
//! Every operation takes the working precision in bits as an argument and
//! rounds its result to that precision (round-to-nearest-even).  Callers that
//! need `prec` trusted bits are expected to work at `prec + guard` bits and
//! compare against thresholds of the form `2^(-prec+guard)`; the guard sizes
//! used by the crate's own consumers are stated at each call site.
//!
//! Precisions below [`MIN_PREC`] bits are rounded up: the backing
//! representation allocates whole 64-bit words, so 64 bits is the smallest
//! precision that can actually be carried.
//!
//! All functions here are pure.  The only shared state is a pair of
//! per-thread caches (backend constants such as π, and Bernoulli-number
//! numerators for the gamma function) that memoize work across calls on the
//! same thread.

mod constants;
mod gamma;
mod real;
mod special;

pub use constants::{agm, constant_names, named_constant};
pub use gamma::{beta, gamma, ln_gamma};
pub use real::BigReal;
pub use special::{erf, erfi};

/// Working precision in bits.
pub type Prec = usize;

/// Smallest representable precision (one mantissa word).
pub const MIN_PREC: Prec = 64;

/// Number of decimal digits that are fully trusted when a value was computed
/// at `prec` bits: the top `prec - 64` bits converted to a digit count.
pub fn trusted_decimal_digits(prec: Prec) -> usize {
    let bits = prec.saturating_sub(64);
    (bits as f64 * std::f64::consts::LOG10_2).floor() as usize
}

/// Errors surfaced by the numerics layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    /// Gamma (or a function built on it) was evaluated too close to a pole.
    /// `nearest` is the non-positive integer the argument collided with.
    #[error("gamma pole near {nearest}: argument within 2^-{within_log2} of a non-positive integer")]
    Pole { nearest: i64, within_log2: u32 },

    /// Argument outside the real domain of an operation, e.g. `sqrt(-2)` or
    /// `ln(0)`.
    #[error("domain error in {op}({arg})")]
    Domain { op: &'static str, arg: String },

    /// A constant name not present in the registry.
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),

    /// A malformed numeric literal.
    #[error("cannot parse `{input}` as a number: {reason}")]
    Parse { input: String, reason: String },
}
