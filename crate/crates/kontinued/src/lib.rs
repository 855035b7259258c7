//! Arbitrary-precision evaluation, certification, and discovery of
//! generalized continued fractions.
//!
//! A generalized continued fraction is written here in Gauss' notation
//!
//! ```text
//!                      b1
//! a0 + K(bn/an) = a0 + ──────────
//!                      a1 + b2
//!                           ──────
//!                           a2 + …
//! ```
//!
//! with partial numerators `bn` and partial denominators `an` given by
//! closed-form rules in the index `n`.  The crate provides:
//!
//! * [`numerics`] — a real-number type of explicit binary precision together
//!   with the special functions (gamma, beta, erf, erfi) and mathematical
//!   constants needed to express closed-form values of such fractions;
//! * [`cf`] — polynomial term rules, backward and forward (Lentz) evaluators,
//!   and a convergence-certifying driver that compares depth `N` against
//!   depth `2N`;
//! * [`pslq`] — integer relation detection, used to match a numerical value
//!   `y` against database constants `c` through relations `p·y + q·c + r = 0`;
//! * [`constdb`] — a constants database with exact expression trees, cached
//!   high-precision digits, and a fast `f64` lookup index;
//! * [`miner`] — randomized search over small-coefficient fractions with a
//!   fast `f64` filter, database matching, and high-precision confirmation;
//! * [`identities`] — a fixed catalogue of nine parametric identities whose
//!   left-hand fractions evaluate to gamma quotients, powers, and error
//!   function ratios, with residual certification and convergence-rate
//!   comparison against classical references.
//!
//! Batch operations (identity grids, mining) run data-parallel via rayon when
//! the default `parallel` feature is enabled and degrade to sequential loops
//! without it; results are bit-identical either way.

pub mod cf;
pub mod constdb;
pub mod identities;
pub mod miner;
pub mod numerics;
pub mod pslq;

pub use cf::{CfStatus, ConvergenceReport, Gcf, PolyQ, ScaleValue, TermRule};
pub use constdb::ConstDb;
pub use identities::{IdentityCase, IdentityId, Params, Verdict};
pub use miner::{MineConfig, MineReport, SearchSpace};
pub use numerics::{BigReal, NumericsError, Prec};
pub use pslq::{MatchReport, RelationCandidate, RelationStatus};

/// Route the data-parallel stages through `n` worker threads.  Takes effect
/// once per process; a second call reports the pool builder's error.  In
/// builds without the `parallel` feature every stage already runs
/// sequentially and the request is a no-op.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> Result<(), String> {
    Ok(())
}
