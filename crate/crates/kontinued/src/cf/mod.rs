//! Generalized continued fractions with polynomial index rules.
//!
//! A *generalized continued fraction* is an expression
//!
//! ```text
//!                 b₁
//! a₀ + ───────────────────────── ,   written  a₀ + K(bₙ / aₙ),
//!                     b₂                          n≥1
//!      a₁ + ────────────────────
//!                        b₃
//!           a₂ + ───────────────
//!                a₃ + ⋱
//! ```
//!
//! where the partial numerators `bₙ` and denominators `aₙ` are produced by
//! index rules — here, sums of rational polynomials in `n` with exact or
//! symbolic scalar multipliers (see [`TermRule`]).  A [`Gcf`] optionally
//! carries separate rules for `b₁` and `a₁`, because many closed forms are
//! naturally "regular from `n = 2` on" with one irregular leading term; the
//! equivalence transformation below produces exactly this shape.
//!
//! # Evaluation
//!
//! * [`eval_backward`] runs the backward recurrence `tₙ = bₙ/(aₙ + tₙ₊₁)`
//!   from a fixed depth.  It is the reference evaluator: given a depth it
//!   computes that convergent and nothing else.
//! * [`eval_lentz`] runs the modified Lentz forward iteration, which needs no
//!   depth in advance and detects finite termination, oscillation, and
//!   blow-up as it goes.
//! * [`converge`] is the certifying driver: it evaluates convergents at
//!   doubling depths `N, 2N, …` and accepts only when two successive rungs
//!   agree to the requested precision (with guard bits), so a `Converged`
//!   status is backed by an explicit two-point certificate rather than a
//!   step-size heuristic.
//!
//! A partial numerator that is *provably* zero at some index truncates the
//! fraction: the value is the convergent just before the lowest such index.
//! Zero detection is exact (rational arithmetic on the rules), never a
//! floating-point test against a threshold.
//!
//! # Equivalence transformations
//!
//! For any nonzero scalars `cₙ` the rewrite
//!
//! ```text
//! bₙ ↦ cₙ·cₙ₋₁·bₙ ,   aₙ ↦ cₙ·aₙ ,   c₀ := 1
//! ```
//!
//! leaves every convergent — hence the value — unchanged.
//! [`equivalence_scale`] applies this with `cₙ = c(n)` for a rational
//! polynomial `c`, rejecting scale polynomials that vanish at any index
//! `n ≥ 1`.  The transformed fraction carries a `b₁` override because `b₁`
//! picks up only the single factor `c₁`.
//!
//! The `cf(…)` literal syntax for fractions is handled by [`parse_cf`] and
//! [`Gcf::render`]; the grammar is documented on [`parse_cf`].

mod eval;
mod literal;
mod poly;
mod scale;
mod term;

pub use eval::{
    converge, converge_with, equivalence_scale, eval_backward, eval_lentz, DEFAULT_MAX_DEPTH,
};
pub use literal::{parse_cf, CfParseError};
pub use poly::PolyQ;
pub use scale::ScaleValue;
pub use term::TermRule;

use crate::numerics::NumericsError;

// ---------------------------------------------------------------------------
// the fraction itself
// ---------------------------------------------------------------------------

/// A generalized continued fraction `a₀ + K(bₙ/aₙ)` with optional first-term
/// overrides.
///
/// The override rules, when present, replace the value of the corresponding
/// rule *at `n = 1` only*; the regular rules govern every `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gcf {
    a0: TermRule,
    b: TermRule,
    a: TermRule,
    b1: Option<TermRule>,
    a1: Option<TermRule>,
}

impl Gcf {
    /// Build from the leading term and the two index rules.  `a0` must be a
    /// constant rule (no dependence on `n`).
    pub fn new(a0: TermRule, b: TermRule, a: TermRule) -> Self {
        debug_assert!(a0.degree().unwrap_or(0) == 0, "a0 must be constant");
        Gcf {
            a0,
            b,
            a,
            b1: None,
            a1: None,
        }
    }

    /// Shorthand for fractions with small integer data.
    pub fn from_i64(a0: i64, b: &[i64], a: &[i64]) -> Self {
        Self::new(
            TermRule::constant(ScaleValue::from_i64(a0)),
            TermRule::from_i64_coeffs(b),
            TermRule::from_i64_coeffs(a),
        )
    }

    /// Replace the partial numerator at `n = 1` (the rule is evaluated at 1).
    pub fn with_first_numerator(mut self, b1: TermRule) -> Self {
        self.b1 = Some(b1);
        self
    }

    /// Replace the partial denominator at `n = 1`.
    pub fn with_first_denominator(mut self, a1: TermRule) -> Self {
        self.a1 = Some(a1);
        self
    }

    pub fn a0(&self) -> &TermRule {
        &self.a0
    }

    pub fn b_rule(&self) -> &TermRule {
        &self.b
    }

    pub fn a_rule(&self) -> &TermRule {
        &self.a
    }

    pub fn b1_override(&self) -> Option<&TermRule> {
        self.b1.as_ref()
    }

    pub fn a1_override(&self) -> Option<&TermRule> {
        self.a1.as_ref()
    }

    /// The rule that actually governs `b₁`.
    pub fn effective_b1(&self) -> &TermRule {
        self.b1.as_ref().unwrap_or(&self.b)
    }

    /// The rule that actually governs `a₁`.
    pub fn effective_a1(&self) -> &TermRule {
        self.a1.as_ref().unwrap_or(&self.a)
    }

    /// Whether `bₙ` is provably zero at index `n ≥ 1` (exact test).
    pub fn b_is_exact_zero_at(&self, n: i64) -> bool {
        if n == 1 {
            self.effective_b1().is_exact_zero_at(1)
        } else {
            self.b.is_exact_zero_at(n)
        }
    }

    /// Canonical literal form, re-readable by [`parse_cf`].
    pub fn render(&self) -> String {
        literal::render(self)
    }
}

impl std::fmt::Display for Gcf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

// ---------------------------------------------------------------------------
// evaluation outcomes
// ---------------------------------------------------------------------------

/// How an evaluation run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    /// Two doubled depths (or the Lentz step criterion) agreed to the
    /// requested precision.
    Converged,
    /// A partial numerator is exactly zero; the fraction is finite and the
    /// reported value is exact up to rounding.
    FiniteTermination,
    /// Convergents keep cycling without settling (repeated zero
    /// denominators or a persistent stall in the step ratio).
    Oscillating,
    /// Magnitudes blew past the representable window; no finite value.
    Divergent,
    /// The depth budget ran out before any of the above could be concluded.
    DepthExhausted,
}

impl CfStatus {
    /// Statuses that come with a trustworthy value.
    pub fn is_settled(self) -> bool {
        matches!(self, CfStatus::Converged | CfStatus::FiniteTermination)
    }
}

impl std::fmt::Display for CfStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CfStatus::Converged => "converged",
            CfStatus::FiniteTermination => "finite-termination",
            CfStatus::Oscillating => "oscillating",
            CfStatus::Divergent => "divergent",
            CfStatus::DepthExhausted => "depth-exhausted",
        };
        f.write_str(s)
    }
}

/// Result of [`converge`] or [`eval_lentz`].
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Best value obtained; trustworthy only when `status.is_settled()`.
    pub value: crate::numerics::BigReal,
    /// Depth at which the run stopped (for `FiniteTermination`, the depth of
    /// the exact convergent).
    pub depth_used: u64,
    pub status: CfStatus,
    /// Observed two-rung gap (or Lentz step size) at the stopping point; an
    /// a-posteriori error indicator, zero for finite termination.
    pub error_estimate: crate::numerics::BigReal,
}

impl ConvergenceReport {
    pub fn is_settled(&self) -> bool {
        self.status.is_settled()
    }
}

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

/// Failures while constructing or evaluating a fraction.
#[derive(Debug, thiserror::Error)]
pub enum CfError {
    /// The backward recurrence hit an exactly-zero denominator at the given
    /// depth.  Callers typically retry at a neighbouring depth.
    #[error("zero denominator in backward recurrence at depth {depth}")]
    ZeroDenominator { depth: u64 },

    /// An equivalence-scale polynomial vanishes at an index it must not.
    #[error("equivalence scale vanishes at n = {n}")]
    ZeroScale { n: i64 },

    /// A scale or constant could not be resolved numerically.
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
