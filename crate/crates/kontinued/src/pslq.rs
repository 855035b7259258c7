//! Integer-relation detection with the PSLQ algorithm.
//!
//! Given reals x₁,…,x_k, an *integer relation* is a non-zero integer vector
//! (m₁,…,m_k) with
//!
//! ```text
//!     m₁·x₁ + m₂·x₂ + ⋯ + m_k·x_k = 0 .
//! ```
//!
//! [`pslq`] runs the classical single-level PSLQ iteration (Ferguson–Bailey,
//! with the γ = 2/√3 row-selection weight): the input vector is normalised,
//! an (k × k−1) lower-trapezoidal matrix `H` is built from the partial norms
//! `s_j = √(Σ_{i≥j} xᵢ²)`, and each round performs a weighted row swap, an
//! orthogonalising corner rotation, and a Hermite-style integer reduction
//! while accumulating the inverse transforms in an integer matrix `B`.  A
//! relation is declared only after the candidate column of `B` is checked
//! against the inputs in interval-honest big-float arithmetic: the residual
//! must fall below the detection threshold
//!
//! ```text
//!     τ = 2^(64−prec) · max |xᵢ| .
//! ```
//!
//! When no relation exists within the requested coefficient range the
//! algorithm terminates with a *certificate*: PSLQ guarantees that any
//! integer relation m satisfies ‖m‖₂ ≥ 1/max_j |H_jj|, so once that bound
//! (divided by √k to convert to the sup norm) exceeds `max_norm` the search
//! is exhausted and the bound is reported.
//!
//! All linear algebra runs in fixed-point arithmetic over [`BigInt`] with
//! `prec` fractional bits — the same representation mpmath uses — which keeps
//! the iteration exact, fast and platform-independent.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::numerics::{BigReal, Prec};

// ---------------------------------------------------------------------------
// public types
// ---------------------------------------------------------------------------

/// Outcome status of a PSLQ search.
#[derive(Debug, Clone, PartialEq)]
pub enum RelationStatus {
    /// A relation below the detection threshold was found and re-verified.
    Found,
    /// No relation with sup-norm ≤ `max_norm` exists (or the iteration cap
    /// was reached).  `norm_bound` is the best certified lower bound on the
    /// sup-norm of any relation that could still exist.
    Exhausted { norm_bound: f64 },
}

/// Result of a PSLQ search.
///
/// For [`RelationStatus::Found`] the fields describe the relation:
/// `coefficients · x = residual` with `|residual| ≤ τ` and
/// `sup_norm = max |mᵢ| ≤ max_norm`.  The vector is sign-normalised so its
/// first non-zero coefficient is positive.  For `Exhausted` the coefficient
/// vector is empty, the residual is zero and `sup_norm` is 0.
#[derive(Debug, Clone)]
pub struct RelationCandidate {
    pub coefficients: Vec<BigInt>,
    pub residual: BigReal,
    pub sup_norm: u64,
    pub status: RelationStatus,
}

impl RelationCandidate {
    pub fn is_found(&self) -> bool {
        self.status == RelationStatus::Found
    }
}

/// One confirmed linear-rational match `p·y + q·c + r = 0` against a named
/// constant `c`, produced by [`match_value`].
#[derive(Debug, Clone)]
pub struct MatchReport {
    /// Name of the constant the value was matched against.
    pub name: String,
    /// Coefficients `(p, q, r)` of `p·y + q·c + r = 0`, sign-normalised so
    /// that `p > 0`.
    pub relation: [BigInt; 3],
    /// `|p·y + q·c + r|` at the search precision.
    pub residual: BigReal,
    /// `max(|p|, |q|, |r|)`.
    pub sup_norm: u64,
}

impl MatchReport {
    /// Human-readable equation such as `2*y = 1*e2 + 5`, solving the stored
    /// relation for `y` (`y_name` names the left-hand value).
    pub fn describe(&self, y_name: &str) -> String {
        let p = &self.relation[0];
        let q = -&self.relation[1];
        let r = -&self.relation[2];
        let mut rhs = String::new();
        if !q.is_zero() {
            rhs.push_str(&format!("{q}*{}", self.name));
        }
        if !r.is_zero() || rhs.is_empty() {
            if rhs.is_empty() {
                rhs.push_str(&r.to_string());
            } else if r.is_negative() {
                rhs.push_str(&format!(" - {}", r.magnitude()));
            } else {
                rhs.push_str(&format!(" + {r}"));
            }
        }
        format!("{p}*{y_name} = {rhs}")
    }
}

/// Reasons a PSLQ search cannot even start.
#[derive(Debug, Error)]
pub enum PslqError {
    #[error("pslq needs at least two entries, got {0}")]
    TooFewEntries(usize),
    #[error("max_norm must be at least 1")]
    InvalidMaxNorm,
    #[error("entry {index} is zero; drop it and search the remaining vector")]
    ZeroEntry { index: usize },
    #[error(
        "precision too low: recovering coefficients up to {max_norm} over {k} \
         entries needs more than {available} bits (k·log2(max_norm) > prec/2)"
    )]
    PrecisionTooLow {
        k: usize,
        max_norm: u64,
        available: Prec,
    },
}

// ---------------------------------------------------------------------------
// fixed-point helpers (value v is stored as round(v·2^prec))
// ---------------------------------------------------------------------------

fn fmul(a: &BigInt, b: &BigInt, prec: usize) -> BigInt {
    (a * b) >> prec
}

fn fdiv(a: &BigInt, b: &BigInt, prec: usize) -> BigInt {
    debug_assert!(!b.is_zero(), "fixed-point division by zero");
    (a << prec) / b
}

/// √a in fixed point; `a` must be non-negative.
fn fsqrt(a: &BigInt, prec: usize) -> BigInt {
    (a << prec).sqrt()
}

/// Nearest integer to the ratio a/b of two same-scale fixed-point numbers
/// (ties away from zero, matching `BigRational::round`).
fn round_ratio(a: &BigInt, b: &BigInt) -> BigInt {
    BigRational::new(a.clone(), b.clone()).round().to_integer()
}

fn fixed_to_f64(a: &BigInt, prec: usize) -> f64 {
    let v = BigReal::from_bigint(a, 64);
    v.mul(&BigReal::pow2(-(prec as i64), 64), 64).to_f64()
}

// ---------------------------------------------------------------------------
// the algorithm
// ---------------------------------------------------------------------------

/// Exact residual `Σ mᵢ·xᵢ` evaluated at `prec + 32` bits.
pub fn relation_residual(x: &[BigReal], m: &[BigInt], prec: Prec) -> BigReal {
    let wp = prec + 32;
    let mut acc = BigReal::zero(wp);
    for (v, c) in x.iter().zip(m) {
        if c.is_zero() {
            continue;
        }
        let term = BigReal::from_bigint(c, wp).mul(&v.with_prec(wp), wp);
        acc = acc.add(&term, wp);
    }
    acc
}

/// Detection threshold `τ = 2^(64−prec)·max |xᵢ|`.
fn detection_threshold(x: &[BigReal], prec: Prec) -> BigReal {
    let mut maxabs = BigReal::zero(prec);
    for v in x {
        let a = v.abs();
        if a > maxabs {
            maxabs = a;
        }
    }
    BigReal::pow2(-(prec as i64) + 64, prec).mul(&maxabs, prec)
}

/// Search for an integer relation among `x` with sup-norm at most `max_norm`.
///
/// Returns a [`RelationCandidate`] whose status is `Found` (with the
/// verified relation) or `Exhausted` (with the certified norm bound).  The
/// search is deterministic; the iteration cap is `200·k²`.
pub fn pslq(x: &[BigReal], max_norm: u64, prec: Prec) -> Result<RelationCandidate, PslqError> {
    let n = x.len();
    if n < 2 {
        return Err(PslqError::TooFewEntries(n));
    }
    if max_norm == 0 {
        return Err(PslqError::InvalidMaxNorm);
    }
    if (n as f64) * (max_norm as f64).log2() > prec as f64 / 2.0 {
        return Err(PslqError::PrecisionTooLow {
            k: n,
            max_norm,
            available: prec,
        });
    }
    for (index, v) in x.iter().enumerate() {
        if v.is_zero() {
            return Err(PslqError::ZeroEntry { index });
        }
    }

    let p = prec;
    let tau = detection_threshold(x, p);

    // ---- normalise and convert to fixed point ----
    // Exact prescale by 2^(−emax) puts the largest entry in [1/2, 1); if a
    // small entry then rounds to zero fixed-point, the dynamic range of the
    // inputs exceeds the working precision.
    let emax = x
        .iter()
        .map(|v| v.exponent().expect("entries checked non-zero"))
        .max()
        .expect("non-empty");
    let scaled: Vec<BigReal> = x
        .iter()
        .map(|v| v.with_prec(p).mul(&BigReal::pow2(-emax, p), p))
        .collect();
    let xfix: Vec<BigInt> = scaled.iter().map(|v| v.to_scaled_int(p as i64)).collect();
    if xfix.iter().any(|v| v.is_zero()) {
        return Err(PslqError::PrecisionTooLow {
            k: n,
            max_norm,
            available: prec,
        });
    }

    // partial norms s_j = √(Σ_{i≥j} xᵢ²), then y = x/s₀
    let mut sfix = vec![BigInt::zero(); n];
    let mut acc = BigInt::zero();
    for k in (0..n).rev() {
        acc += fmul(&xfix[k], &xfix[k], p);
        sfix[k] = fsqrt(&acc, p);
    }
    let s0 = sfix[0].clone();
    let mut yfix: Vec<BigInt> = xfix.iter().map(|v| fdiv(v, &s0, p)).collect();
    for s in sfix.iter_mut() {
        *s = fdiv(s, &s0, p);
    }

    // detection trigger in normalised fixed-point units:
    // |y_col| ≤ τ·2^(−emax)/‖x·2^(−emax)‖.  Doubled for rounding slack; the
    // exact BigReal check below is what actually admits a relation.
    let snorm = BigReal::from_bigint(&s0, p).mul(&BigReal::pow2(-(p as i64), p), p);
    let trigger = tau
        .mul(&BigReal::pow2(-emax, p), p)
        .div(&snorm, p)
        .to_scaled_int(p as i64)
        * 2i32;
    let trigger = trigger.max(BigInt::one());

    // ---- H matrix from partial norms ----
    let mut h = vec![vec![BigInt::zero(); n - 1]; n];
    for j in 0..n - 1 {
        h[j][j] = fdiv(&sfix[j + 1], &sfix[j], p);
        let den = fmul(&sfix[j], &sfix[j + 1], p);
        if den.is_zero() {
            return Err(PslqError::PrecisionTooLow {
                k: n,
                max_norm,
                available: prec,
            });
        }
        for i in j + 1..n {
            h[i][j] = -fdiv(&fmul(&yfix[i], &yfix[j], p), &den, p);
        }
    }

    let mut amat: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(u8::from(i == j))).collect())
        .collect();
    let mut bmat = amat.clone();

    // ---- initial Hermite reduction ----
    for i in 1..n {
        for j in (0..i).rev() {
            if h[j][j].is_zero() {
                continue;
            }
            let t = round_ratio(&h[i][j], &h[j][j]);
            if t.is_zero() {
                continue;
            }
            yfix[j] = &yfix[j] + &t * &yfix[i];
            for k in 0..=j {
                h[i][k] = &h[i][k] - &t * &h[j][k];
            }
            for k in 0..n {
                amat[i][k] = &amat[i][k] - &t * &amat[j][k];
                bmat[k][j] = &bmat[k][j] + &t * &bmat[k][i];
            }
        }
    }

    // γ = 2/√3 and its powers, fixed point
    let one_fix = BigInt::one() << p;
    let g = fdiv(&(&one_fix << 1usize), &fsqrt(&(&one_fix * 3i32), p), p);
    let mut gpow = Vec::with_capacity(n);
    gpow.push(one_fix.clone());
    for i in 1..n {
        let prev = gpow[i - 1].clone();
        gpow.push(fmul(&prev, &g, p));
    }

    let extract = |bmat: &[Vec<BigInt>], col: usize| -> Vec<BigInt> {
        (0..n).map(|r| bmat[r][col].clone()).collect()
    };

    let mut best_bound = 0.0f64;
    let max_iter = 200 * n * n;

    for step in 0..=max_iter {
        // ---- candidate check (also catches relations visible at entry) ----
        let i_min = (0..n)
            .min_by_key(|&i| yfix[i].abs())
            .expect("non-empty vector");
        if yfix[i_min].abs() <= trigger {
            let m = extract(&bmat, i_min);
            if let Some(found) = admit(x, &m, max_norm, &tau, p) {
                return Ok(found);
            }
        }
        if step == max_iter {
            break;
        }

        // ---- row selection: maximise γ^i·|H_ii| ----
        let mut m_row = 0usize;
        let mut best_w = BigInt::from(-1);
        for i in 0..n - 1 {
            let w = fmul(&gpow[i + 1], &h[i][i].abs(), p);
            if w > best_w {
                best_w = w;
                m_row = i;
            }
        }
        let m = m_row;

        // ---- swap rows m, m+1 (columns of B) ----
        yfix.swap(m, m + 1);
        h.swap(m, m + 1);
        amat.swap(m, m + 1);
        for row in bmat.iter_mut() {
            row.swap(m, m + 1);
        }

        // ---- corner rotation restores the trapezoidal shape ----
        if m + 2 < n {
            let t0 = fsqrt(
                &(fmul(&h[m][m], &h[m][m], p) + fmul(&h[m][m + 1], &h[m][m + 1], p)),
                p,
            );
            if !t0.is_zero() {
                let t1 = fdiv(&h[m][m], &t0, p);
                let t2 = fdiv(&h[m][m + 1], &t0, p);
                for row in h.iter_mut().skip(m) {
                    let t3 = row[m].clone();
                    let t4 = row[m + 1].clone();
                    row[m] = fmul(&t1, &t3, p) + fmul(&t2, &t4, p);
                    row[m + 1] = fmul(&t1, &t4, p) - fmul(&t2, &t3, p);
                }
            }
        }

        // ---- Hermite reduction of the disturbed rows ----
        for i in m + 1..n {
            let jmax = (i - 1).min(m + 1);
            for j in (0..=jmax).rev() {
                if h[j][j].is_zero() {
                    break;
                }
                let t = round_ratio(&h[i][j], &h[j][j]);
                if t.is_zero() {
                    continue;
                }
                yfix[j] = &yfix[j] + &t * &yfix[i];
                for k in 0..=j {
                    h[i][k] = &h[i][k] - &t * &h[j][k];
                }
                for k in 0..n {
                    amat[i][k] = &amat[i][k] - &t * &amat[j][k];
                    bmat[k][j] = &bmat[k][j] + &t * &bmat[k][i];
                }
            }
        }

        // ---- norm bound: any relation has ‖m‖₂ ≥ 1/max|H_jj| ----
        let mut hmax = BigInt::zero();
        for (j, row) in h.iter().enumerate().take(n - 1) {
            let a = row[j].abs();
            if a > hmax {
                hmax = a;
            }
        }
        if !hmax.is_zero() {
            let bound2 = fdiv(&one_fix, &hmax, p);
            let bound_sup = fixed_to_f64(&bound2, p) / (n as f64).sqrt();
            if bound_sup > best_bound {
                best_bound = bound_sup;
            }
            if bound_sup > max_norm as f64 {
                break;
            }
        }
    }

    Ok(RelationCandidate {
        coefficients: Vec::new(),
        residual: BigReal::zero(prec),
        sup_norm: 0,
        status: RelationStatus::Exhausted {
            norm_bound: best_bound,
        },
    })
}

/// Validate a candidate column: non-trivial, within the norm budget, and with
/// an exactly recomputed residual below the threshold.  Returns the verified,
/// sign-normalised candidate.
fn admit(
    x: &[BigReal],
    m: &[BigInt],
    max_norm: u64,
    tau: &BigReal,
    prec: Prec,
) -> Option<RelationCandidate> {
    if m.iter().all(|c| c.is_zero()) {
        return None;
    }
    let sup = m.iter().map(|c| c.abs()).max().expect("non-empty");
    let sup_norm = sup.to_u64()?;
    if sup_norm == 0 || sup_norm > max_norm {
        return None;
    }
    let residual = relation_residual(x, m, prec).abs();
    if !(residual <= tau.clone()) {
        return None;
    }
    let mut coefficients = m.to_vec();
    if let Some(first) = coefficients.iter().find(|c| !c.is_zero()) {
        if first.is_negative() {
            for c in coefficients.iter_mut() {
                *c = -&*c;
            }
        }
    }
    Some(RelationCandidate {
        coefficients,
        residual,
        sup_norm,
        status: RelationStatus::Found,
    })
}

// ---------------------------------------------------------------------------
// matching a value against a constant catalogue
// ---------------------------------------------------------------------------

/// Search for linear-rational matches `p·y + q·c + r = 0` between `y` and
/// each candidate constant `c`, by running [`pslq`] on the triple
/// `(y, c, 1)`.  Hits are sorted by sup-norm, then residual, so the simplest
/// explanation is listed first.
pub fn match_value(
    y: &BigReal,
    candidates: &[(String, BigReal)],
    max_norm: u64,
    prec: Prec,
) -> Result<Vec<MatchReport>, PslqError> {
    let mut hits = Vec::new();
    for (name, c) in candidates {
        let triple = [y.clone(), c.clone(), BigReal::one(prec)];
        let r = pslq(&triple, max_norm, prec)?;
        if !r.is_found() {
            continue;
        }
        // a relation must involve both y and c: with p = 0 it only says c is
        // near-rational, with q = 0 it only says y is — neither is a match
        if r.coefficients[0].is_zero() || r.coefficients[1].is_zero() {
            continue;
        }
        let mut relation = [
            r.coefficients[0].clone(),
            r.coefficients[1].clone(),
            r.coefficients[2].clone(),
        ];
        if relation[0].is_negative() {
            for c in relation.iter_mut() {
                *c = -&*c;
            }
        }
        hits.push(MatchReport {
            name: name.clone(),
            relation,
            residual: r.residual,
            sup_norm: r.sup_norm,
        });
    }
    hits.sort_by(|a, b| {
        a.sup_norm.cmp(&b.sup_norm).then_with(|| {
            a.residual
                .partial_cmp(&b.residual)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(hits)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
