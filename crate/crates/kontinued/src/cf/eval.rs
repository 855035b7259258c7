//! Evaluation strategies for generalized continued fractions.
//!
//! Three entry points with distinct contracts:
//!
//! * [`eval_backward`] — the tail recurrence `tₙ = bₙ/(aₙ + tₙ₊₁)` seeded
//!   with `t = 0` at a caller-chosen depth.  Numerically benign (each step is
//!   one addition and one division) but blind: it reports the convergent at
//!   that depth and nothing about convergence.
//! * [`eval_lentz`] — the modified Lentz forward iteration tracking the
//!   ratio sequences `Cₙ`, `Dₙ`.  Depth-free, detects finite termination the
//!   moment a partial numerator vanishes, and classifies cycling or blow-up.
//! * [`converge`] — the certifying driver used by everything that needs a
//!   trusted value: backward evaluations at doubling depths, accepted only
//!   when two successive rungs agree within the certificate threshold
//!
//!   ```text
//!   |f(2N) − f(N)| ≤ 2^(guard − prec) · max(1, |f(2N)|),   guard = 48.
//!   ```
//!
//!   Agreement of doubled depths is a much stronger signal than a small last
//!   step: slowly converging fractions (error ∼ n^(−κ)) shrink their
//!   per-step movement long before they are anywhere near the limit, but the
//!   `N → 2N` gap stays honest.
//!
//! All internal arithmetic runs at `prec + 32` bits so that accumulated
//! rounding (≤ depth · ulp) stays far below the certificate threshold for
//! every depth this module will attempt.

use crate::numerics::{BigReal, NumericsError, Prec, MIN_PREC};

use super::poly::PolyQ;
use super::{CfError, CfStatus, ConvergenceReport, Gcf};

/// Default ceiling on evaluation depth for the certifying driver and the
/// Lentz iteration.
pub const DEFAULT_MAX_DEPTH: u64 = 1 << 20;

/// Guard bits in the two-rung certificate threshold.
const CERT_GUARD_BITS: i64 = 48;

/// First rung of the doubling ladder.
const LADDER_START: u64 = 64;

/// Consecutive Lentz steps with `|Δ − 1| > 1/2` before declaring a stall.
const STALL_WINDOW: u32 = 256;

/// Lentz zero substitutions tolerated before classifying as oscillating.
const MAX_SUBSTITUTIONS: u32 = 3;

/// Exponent magnitude beyond which an evaluation counts as blown up.
const BLOWUP_EXPONENT: i64 = 1 << 24;

// ---------------------------------------------------------------------------
// materialized view: scales resolved once per run
// ---------------------------------------------------------------------------

/// A fraction with every scalar in its rules resolved to working precision,
/// so the per-term cost is one exact polynomial evaluation plus `O(groups)`
/// multiplications.
struct Materialized<'g> {
    cf: &'g Gcf,
    wp: Prec,
    a0: BigReal,
    b_scales: Vec<BigReal>,
    a_scales: Vec<BigReal>,
    b1_scales: Option<Vec<BigReal>>,
    a1_scales: Option<Vec<BigReal>>,
}

impl<'g> Materialized<'g> {
    fn new(cf: &'g Gcf, wp: Prec) -> Result<Self, NumericsError> {
        Ok(Materialized {
            cf,
            wp,
            a0: cf.a0().eval(0, wp)?,
            b_scales: cf.b_rule().materialize(wp)?,
            a_scales: cf.a_rule().materialize(wp)?,
            b1_scales: cf
                .b1_override()
                .map(|r| r.materialize(wp))
                .transpose()?,
            a1_scales: cf
                .a1_override()
                .map(|r| r.materialize(wp))
                .transpose()?,
        })
    }

    fn b(&self, n: i64) -> BigReal {
        if n == 1 {
            if let (Some(rule), Some(scales)) = (self.cf.b1_override(), &self.b1_scales) {
                return rule.eval_with(1, scales, self.wp);
            }
        }
        self.cf.b_rule().eval_with(n, &self.b_scales, self.wp)
    }

    fn a(&self, n: i64) -> BigReal {
        if n == 1 {
            if let (Some(rule), Some(scales)) = (self.cf.a1_override(), &self.a1_scales) {
                return rule.eval_with(1, scales, self.wp);
            }
        }
        self.cf.a_rule().eval_with(n, &self.a_scales, self.wp)
    }

    fn b_zero(&self, n: i64) -> bool {
        self.cf.b_is_exact_zero_at(n)
    }
}

// ---------------------------------------------------------------------------
// backward recurrence
// ---------------------------------------------------------------------------

struct BackwardOutcome {
    value: BigReal,
    /// Lowest index with an exactly-zero partial numerator, if any; the
    /// value is then the exact convergent at that index minus one.
    terminated_at: Option<u64>,
}

fn backward_once(mat: &Materialized<'_>, depth: u64) -> Result<BackwardOutcome, CfError> {
    let wp = mat.wp;
    let mut t = BigReal::zero(wp);
    let mut terminated_at = None;
    for n in (1..=depth).rev() {
        let ni = n as i64;
        if mat.b_zero(ni) {
            // the fraction truncates here: everything deeper is unreachable
            t = BigReal::zero(wp);
            terminated_at = Some(n);
            continue;
        }
        let den = mat.a(ni).add(&t, wp);
        if den.is_zero() {
            return Err(CfError::ZeroDenominator { depth: n });
        }
        t = mat.b(ni).div(&den, wp);
    }
    Ok(BackwardOutcome {
        value: mat.a0.add(&t, wp),
        terminated_at,
    })
}

/// Convergent at `depth` via the backward recurrence, rounded to `p` bits.
///
/// Errors with [`CfError::ZeroDenominator`] when a tail denominator is
/// exactly zero at this depth; neighbouring depths usually succeed.
pub fn eval_backward(cf: &Gcf, depth: u64, p: Prec) -> Result<BigReal, CfError> {
    let mat = Materialized::new(cf, p + 32)?;
    Ok(backward_once(&mat, depth)?.value.with_prec(p))
}

// ---------------------------------------------------------------------------
// modified Lentz iteration
// ---------------------------------------------------------------------------

fn round_to(value: BigReal, p: Prec) -> BigReal {
    if value.is_finite() {
        value.with_prec(p)
    } else {
        value
    }
}

fn lentz_once(mat: &Materialized<'_>, p: Prec, n_max: u64) -> ConvergenceReport {
    let wp = mat.wp;
    let one = BigReal::one(wp);
    // seed for a vanishing leading term: small enough that its footprint in
    // the recovered value is below the target precision squared
    let tiny_seed = BigReal::pow2(-2 * (p as i64), wp);
    // replacement for an exactly-zero ratio denominator mid-run
    let tiny_sub = BigReal::pow2(-((p as i64) / 2), wp);

    let mut f = if mat.a0.is_zero() {
        tiny_seed
    } else {
        mat.a0.clone()
    };
    let mut c = f.clone();
    let mut d = BigReal::zero(wp);
    let mut substitutions = 0u32;
    let mut stall = 0u32;
    let mut last_gap = one.clone();

    for n in 1..=n_max {
        let ni = n as i64;
        if mat.b_zero(ni) {
            let value = if n == 1 { mat.a0.clone() } else { f };
            return ConvergenceReport {
                value: round_to(value, p),
                depth_used: n - 1,
                status: CfStatus::FiniteTermination,
                error_estimate: BigReal::zero(MIN_PREC),
            };
        }
        let bn = mat.b(ni);
        let an = mat.a(ni);

        d = an.add(&bn.mul(&d, wp), wp);
        if d.is_zero() {
            d = tiny_sub.clone();
            substitutions += 1;
        }
        c = an.add(&bn.div(&c, wp), wp);
        if c.is_zero() {
            c = tiny_sub.clone();
            substitutions += 1;
        }
        if substitutions >= MAX_SUBSTITUTIONS {
            return ConvergenceReport {
                value: round_to(f, p),
                depth_used: n,
                status: CfStatus::Oscillating,
                error_estimate: last_gap.with_prec(MIN_PREC),
            };
        }

        d = d.recip(wp);
        let delta = c.mul(&d, wp);
        f = f.mul(&delta, wp);
        let gap = delta.sub(&one, wp).abs();

        if !f.is_finite() || f.exponent().is_some_and(|e| e.abs() > BLOWUP_EXPONENT) {
            return ConvergenceReport {
                value: f,
                depth_used: n,
                status: CfStatus::Divergent,
                error_estimate: last_gap.with_prec(MIN_PREC),
            };
        }
        if gap.le_pow2(-(p as i64)) {
            let est = f.abs().mul(&gap, wp);
            return ConvergenceReport {
                value: round_to(f, p),
                depth_used: n,
                status: CfStatus::Converged,
                error_estimate: est.with_prec(MIN_PREC),
            };
        }
        // a step ratio pinned far from 1 for a long stretch means the
        // convergents are cycling, not approaching a limit
        if gap.le_pow2(-1) {
            stall = 0;
        } else {
            stall += 1;
            if stall >= STALL_WINDOW {
                return ConvergenceReport {
                    value: round_to(f, p),
                    depth_used: n,
                    status: CfStatus::Oscillating,
                    error_estimate: last_gap.with_prec(MIN_PREC),
                };
            }
        }
        last_gap = gap;
    }

    ConvergenceReport {
        value: round_to(f, p),
        depth_used: n_max,
        status: CfStatus::DepthExhausted,
        error_estimate: last_gap.with_prec(MIN_PREC),
    }
}

/// Forward evaluation with the modified Lentz iteration.
///
/// Stops as soon as the step ratio satisfies `|Δₙ − 1| ≤ 2^(−p)`, a partial
/// numerator vanishes exactly (`FiniteTermination`), the ratio denominators
/// keep hitting zero or the steps stall (`Oscillating`), magnitudes leave
/// the representable window (`Divergent`), or `n_max` runs out.
pub fn eval_lentz(cf: &Gcf, p: Prec, n_max: u64) -> Result<ConvergenceReport, CfError> {
    let mat = Materialized::new(cf, p + 32)?;
    Ok(lentz_once(&mat, p, n_max))
}

// ---------------------------------------------------------------------------
// certifying driver
// ---------------------------------------------------------------------------

/// One ladder rung with retry: an exactly-zero tail denominator at depth `N`
/// is an artifact of where the tail was cut, so `N ± 1` are tried before
/// giving up on the backward recurrence.
fn rung(mat: &Materialized<'_>, depth: u64) -> Result<BackwardOutcome, CfError> {
    match backward_once(mat, depth) {
        Err(CfError::ZeroDenominator { .. }) => match backward_once(mat, depth + 1) {
            Err(CfError::ZeroDenominator { .. }) if depth > 1 => backward_once(mat, depth - 1),
            other => other,
        },
        other => other,
    }
}

fn finite_report(outcome: &BackwardOutcome, terminated_at: u64, p: Prec) -> ConvergenceReport {
    ConvergenceReport {
        value: round_to(outcome.value.clone(), p),
        depth_used: terminated_at - 1,
        status: CfStatus::FiniteTermination,
        error_estimate: BigReal::zero(MIN_PREC),
    }
}

/// Certified evaluation to `p` bits with the default depth budget.
pub fn converge(cf: &Gcf, p: Prec) -> Result<ConvergenceReport, CfError> {
    converge_with(cf, p, DEFAULT_MAX_DEPTH)
}

/// Certified evaluation with an explicit depth budget.
///
/// A `Converged` report means convergents at depths `N` and `2N` agreed
/// within `2^(48−p)·max(1, |f|)`; `error_estimate` is the observed gap.  If
/// the backward recurrence keeps hitting exact zero denominators, the run
/// falls back to Lentz classification, so cyclic fractions come back as
/// `Oscillating` rather than as an error.
pub fn converge_with(cf: &Gcf, p: Prec, n_max: u64) -> Result<ConvergenceReport, CfError> {
    let mat = Materialized::new(cf, p + 32)?;
    let wp = mat.wp;
    let threshold_exp = CERT_GUARD_BITS - p as i64;

    let mut depth = LADDER_START.min(n_max.max(1));
    let mut prev = match rung(&mat, depth) {
        Ok(o) => o,
        Err(CfError::ZeroDenominator { .. }) => return Ok(lentz_once(&mat, p, n_max)),
        Err(e) => return Err(e),
    };
    if let Some(m) = prev.terminated_at {
        return Ok(finite_report(&prev, m, p));
    }

    let mut gaps: Vec<BigReal> = Vec::new();
    while depth < n_max {
        let next_depth = (depth * 2).min(n_max);
        let cur = match rung(&mat, next_depth) {
            Ok(o) => o,
            Err(CfError::ZeroDenominator { .. }) => return Ok(lentz_once(&mat, p, n_max)),
            Err(e) => return Err(e),
        };
        if let Some(m) = cur.terminated_at {
            return Ok(finite_report(&cur, m, p));
        }
        if !cur.value.is_finite() {
            return Ok(ConvergenceReport {
                value: cur.value,
                depth_used: next_depth,
                status: CfStatus::Divergent,
                error_estimate: BigReal::one(MIN_PREC),
            });
        }

        let gap = cur.value.sub(&prev.value, wp).abs();
        let bound = cur
            .value
            .norm_scale(wp)
            .mul(&BigReal::pow2(threshold_exp, wp), wp);
        if gap <= bound {
            return Ok(ConvergenceReport {
                value: cur.value.with_prec(p),
                depth_used: next_depth,
                status: CfStatus::Converged,
                error_estimate: gap.with_prec(MIN_PREC),
            });
        }
        gaps.push(gap);
        prev = cur;
        depth = next_depth;
    }

    let status = classify_stalled_ladder(&gaps, &prev.value);
    let error_estimate = gaps
        .last()
        .map(|g| g.with_prec(MIN_PREC))
        .unwrap_or_else(|| BigReal::one(MIN_PREC));
    Ok(ConvergenceReport {
        value: round_to(prev.value, p),
        depth_used: depth,
        status,
        error_estimate,
    })
}

/// The ladder ran out of depth: decide between plain exhaustion and actual
/// misbehaviour from the shape of the rung gaps.
fn classify_stalled_ladder(gaps: &[BigReal], last_value: &BigReal) -> CfStatus {
    if last_value
        .exponent()
        .is_some_and(|e| e.abs() > BLOWUP_EXPONENT)
    {
        return CfStatus::Divergent;
    }
    let k = gaps.len();
    if k >= 3 && gaps[k - 1] > gaps[k - 2] && gaps[k - 2] > gaps[k - 3] {
        return CfStatus::Divergent;
    }
    if gaps.len() >= 2 {
        if let (Some(first), Some(last)) = (gaps.first(), gaps.last()) {
            if last >= first {
                // doubling the depth several times bought nothing
                return CfStatus::Oscillating;
            }
        }
    }
    CfStatus::DepthExhausted
}

// ---------------------------------------------------------------------------
// equivalence transformation
// ---------------------------------------------------------------------------

/// Apply the equivalence transformation `bₙ ↦ c(n)·c(n−1)·bₙ`,
/// `aₙ ↦ c(n)·aₙ` with the convention `c(0) := 1`, preserving the value.
///
/// The output carries a `b₁` override equal to `c(1)·b₁`, since the
/// convention removes the `c(0)` factor from the first numerator.  The scale
/// polynomial must be nonzero at every integer `n ≥ 1`; integer roots are
/// ruled out by scanning up to the Cauchy bound.
pub fn equivalence_scale(cf: &Gcf, c: &PolyQ) -> Result<Gcf, CfError> {
    use num_traits::Zero;

    if c.is_zero() {
        return Err(CfError::ZeroScale { n: 0 });
    }
    if let Some(bound) = c.root_bound() {
        let top = (bound.ceil() as i64).min(1 << 20);
        for n in 1..=top {
            if c.eval_q(n).is_zero() {
                return Err(CfError::ZeroScale { n });
            }
        }
    }

    let c1 = c.eval_q(1);
    let b1_new = cf.effective_b1().specialize(1).scale_by_rational(&c1);
    let a1_new = cf
        .a1_override()
        .map(|r| r.specialize(1).scale_by_rational(&c1));
    let cc_prev = c.mul(&c.shift(-1));

    let mut out = Gcf::new(
        cf.a0().clone(),
        cf.b_rule().mul_poly(&cc_prev),
        cf.a_rule().mul_poly(c),
    )
    .with_first_numerator(b1_new);
    if let Some(a1) = a1_new {
        out = out.with_first_denominator(a1);
    }
    Ok(out)
}
