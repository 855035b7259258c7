//! Randomized search for continued fractions with recognisable values.
//!
//! The mining pipeline generates random fractions with small polynomial
//! rules, screens them with a cheap `f64` evaluation, and escalates the few
//! survivors through the constants database:
//!
//! ```text
//! generate → fast_eval64 → prefilter_lookup → converge → confirm_match
//! ```
//!
//! Each stage discards almost everything, so the expensive arbitrary-
//! precision work runs on a vanishing fraction of the budget.  Candidate
//! generation is deterministic: candidate `i` of a run with seed `s` draws
//! from an independent, platform-stable ChaCha8 stream, so reports are
//! bit-identical across runs and across the parallel and sequential
//! back-ends (work is scanned in parallel but merged in candidate order).
//!
//! Near-duplicate fractions are collapsed before confirmation: dividing the
//! numerator rule by `c²` and the denominator rule by `c`, where `c` is the
//! rational content of the denominator rule, maps every constant-scale
//! equivalence class `(c²·b, c·a)` — whose members all share a value up to
//! the rational factor `c` — to one canonical key.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cf::{converge_with, Gcf, PolyQ, TermRule};
use crate::constdb::{ConfirmOutcome, ConstDb, ConstDbError};
use crate::numerics::Prec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// search spaces
// ---------------------------------------------------------------------------

/// Bounds for random candidate generation: maximum degrees of the `b` and
/// `a` polynomial rules, the coefficient range, and the range of the leading
/// term `a0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    pub b_degree_max: usize,
    pub a_degree_max: usize,
    pub coeff_lo: i64,
    pub coeff_hi: i64,
    pub a0_lo: i64,
    pub a0_hi: i64,
}

/// Degrees are capped so `f64` Horner evaluation stays well-conditioned at
/// the fast-filter depth, coefficients so canonical keys stay readable.
pub const MAX_RULE_DEGREE: usize = 4;
pub const MAX_COEFF_ABS: i64 = 99;

impl SearchSpace {
    /// Constant rules with coefficients in 1..3 and `a0 = 0` — the smallest
    /// interesting space; it contains the classical golden-ratio fraction.
    pub fn tiny() -> Self {
        SearchSpace {
            b_degree_max: 0,
            a_degree_max: 0,
            coeff_lo: 1,
            coeff_hi: 3,
            a0_lo: 0,
            a0_hi: 0,
        }
    }

    /// Quadratic numerators over linear denominators with single-digit
    /// coefficients.
    pub fn default_space() -> Self {
        SearchSpace {
            b_degree_max: 2,
            a_degree_max: 1,
            coeff_lo: -9,
            coeff_hi: 9,
            a0_lo: -2,
            a0_hi: 2,
        }
    }

    pub fn named(name: &str) -> Option<Self> {
        match name {
            "tiny" => Some(Self::tiny()),
            "default" => Some(Self::default_space()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), MinerError> {
        if self.b_degree_max > MAX_RULE_DEGREE || self.a_degree_max > MAX_RULE_DEGREE {
            return Err(MinerError::Space(format!(
                "rule degrees capped at {MAX_RULE_DEGREE}"
            )));
        }
        if self.coeff_lo > self.coeff_hi || self.a0_lo > self.a0_hi {
            return Err(MinerError::Space("empty range".to_string()));
        }
        if self.coeff_lo.abs() > MAX_COEFF_ABS || self.coeff_hi.abs() > MAX_COEFF_ABS {
            return Err(MinerError::Space(format!(
                "coefficients capped at |c| ≤ {MAX_COEFF_ABS}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("invalid search space: {0}")]
    Space(String),
    #[error(transparent)]
    Db(#[from] ConstDbError),
}

// ---------------------------------------------------------------------------
// candidate generation
// ---------------------------------------------------------------------------

/// Deterministically generate candidate `index` of the run seeded `seed`.
///
/// Each candidate reads an independent ChaCha8 stream (`set_stream(index)`),
/// so any candidate can be regenerated in isolation and parallel scans need
/// no shared generator state.  Draw order: `b` degree, `b` coefficients
/// (constant term upward), `a` degree, `a` coefficients, `a0`.
pub fn candidate(space: &SearchSpace, seed: u64, index: u64) -> Gcf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    random_cf(&mut rng, space)
}

/// Draw one random fraction from `space`.
pub fn random_cf(rng: &mut ChaCha8Rng, space: &SearchSpace) -> Gcf {
    use rand::RngExt;
    let mut draw_poly = |deg_max: usize| -> Vec<i64> {
        let deg = rng.random_range(0..=deg_max);
        (0..=deg)
            .map(|_| rng.random_range(space.coeff_lo..=space.coeff_hi))
            .collect()
    };
    let b = draw_poly(space.b_degree_max);
    let a = draw_poly(space.a_degree_max);
    let a0 = rng.random_range(space.a0_lo..=space.a0_hi);
    Gcf::from_i64(a0, &b, &a)
}

// ---------------------------------------------------------------------------
// fast f64 evaluation
// ---------------------------------------------------------------------------

const LENTZ_TINY_64: f64 = 1e-30;
const STABILITY_RTOL: f64 = 1e-9;

struct Compiled64 {
    a0: f64,
    b: Vec<f64>,
    a: Vec<f64>,
    b1: Option<f64>,
    a1: Option<f64>,
}

fn horner(coeffs: &[f64], n: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * n + c)
}

impl Compiled64 {
    fn new(cf: &Gcf) -> Option<Compiled64> {
        let flatten_at_1 = |rule: Option<&TermRule>| -> Option<Option<f64>> {
            match rule {
                None => Some(None),
                Some(r) => {
                    let co = r.flatten_f64().ok()?;
                    Some(Some(horner(&co, 1.0)))
                }
            }
        };
        Some(Compiled64 {
            a0: horner(&cf.a0().flatten_f64().ok()?, 1.0),
            b: cf.b_rule().flatten_f64().ok()?,
            a: cf.a_rule().flatten_f64().ok()?,
            b1: flatten_at_1(cf.b1_override())?,
            a1: flatten_at_1(cf.a1_override())?,
        })
    }

    fn b_at(&self, n: u32) -> f64 {
        if n == 1 {
            if let Some(v) = self.b1 {
                return v;
            }
        }
        horner(&self.b, n as f64)
    }

    fn a_at(&self, n: u32) -> f64 {
        if n == 1 {
            if let Some(v) = self.a1 {
                return v;
            }
        }
        horner(&self.a, n as f64)
    }
}

/// Evaluate `cf` to `depth` terms in plain `f64` with the modified Lentz
/// recurrence.  Returns `(value, stable)`: the value is trustworthy only
/// when `stable` is true, which requires the depth/2 and depth convergents
/// to agree to a relative 1e−9 and no overflow or NaN on the way.  An
/// exactly-zero partial numerator terminates the fraction early with the
/// exact finite value, which counts as stable.  Never fails: malformed
/// fractions simply come back unstable.
pub fn fast_eval64(cf: &Gcf, depth: u32) -> (f64, bool) {
    let Some(c) = Compiled64::new(cf) else {
        return (f64::NAN, false);
    };
    eval_compiled(&c, depth)
}

fn eval_compiled(c: &Compiled64, depth: u32) -> (f64, bool) {
    let depth = depth.max(2);
    let mid = depth / 2;
    let mut f = if c.a0 == 0.0 { LENTZ_TINY_64 } else { c.a0 };
    let mut cc = f;
    let mut dd = 0.0f64;
    let mut f_mid = f64::NAN;
    for n in 1..=depth {
        let bn = c.b_at(n);
        let an = c.a_at(n);
        if bn == 0.0 {
            // the fraction terminates: its value is the previous convergent
            let v = if n == 1 { c.a0 } else { f };
            return (v, v.is_finite());
        }
        dd = an + bn * dd;
        if dd == 0.0 {
            dd = LENTZ_TINY_64;
        }
        cc = an + bn / cc;
        if cc == 0.0 {
            cc = LENTZ_TINY_64;
        }
        dd = 1.0 / dd;
        f *= cc * dd;
        if !f.is_finite() {
            return (f, false);
        }
        if n == mid {
            f_mid = f;
        }
    }
    let stable = f.is_finite() && (f_mid - f).abs() <= STABILITY_RTOL * f.abs().max(1.0);
    (f, stable)
}

// ---------------------------------------------------------------------------
// batch evaluation back-ends (also exercised by the throughput benchmark)
// ---------------------------------------------------------------------------

/// Scan candidates `0..n` sequentially: generate, evaluate, prefilter.
pub fn scan_batch_sequential(
    space: &SearchSpace,
    db: &ConstDb,
    seed: u64,
    n: u64,
    depth: u32,
    tol: f64,
) -> Vec<Scan> {
    (0..n)
        .map(|i| scan_one(space, db, seed, i, depth, tol))
        .collect()
}

/// Scan candidates `0..n` across the rayon thread pool.  The output order is
/// by candidate index, identical to the sequential back-end.
#[cfg(feature = "parallel")]
pub fn scan_batch_parallel(
    space: &SearchSpace,
    db: &ConstDb,
    seed: u64,
    n: u64,
    depth: u32,
    tol: f64,
) -> Vec<Scan> {
    (0..n)
        .into_par_iter()
        .map(|i| scan_one(space, db, seed, i, depth, tol))
        .collect()
}

/// Outcome of the cheap pipeline stages for one candidate.
pub struct Scan {
    pub index: u64,
    pub value: f64,
    pub stable: bool,
    /// Database entry indices whose affine images the value landed on;
    /// empty when the candidate was unstable or missed everything.
    pub hit_entries: Vec<usize>,
    /// The fraction, retained only when there are hits to follow up.
    pub cf: Option<Gcf>,
}

fn scan_one(space: &SearchSpace, db: &ConstDb, seed: u64, index: u64, depth: u32, tol: f64) -> Scan {
    let cf = candidate(space, seed, index);
    let (value, stable) = fast_eval64(&cf, depth);
    let mut hit_entries = Vec::new();
    if stable {
        for h in db.prefilter_lookup(value, tol) {
            if !hit_entries.contains(&h.entry_index) {
                hit_entries.push(h.entry_index);
            }
        }
        hit_entries.sort_unstable();
    }
    let keep = !hit_entries.is_empty();
    Scan {
        index,
        value,
        stable,
        hit_entries,
        cf: keep.then_some(cf),
    }
}

// ---------------------------------------------------------------------------
// mining
// ---------------------------------------------------------------------------

/// Tunables for a mining run; the defaults match the documented pipeline.
#[derive(Debug, Clone)]
pub struct MineConfig {
    pub seed: u64,
    pub budget: u64,
    /// Confirmation precision: candidates are converged at twice this and
    /// the database relation must hold at this precision's threshold.
    pub prec_confirm: Prec,
    /// Depth of the f64 fast filter.
    pub depth64: u32,
    /// Prefilter window around each affine image.
    pub prefilter_tol: f64,
    /// Coefficient budget for confirmation relations.
    pub max_norm: u64,
    /// Depth cap for high-precision convergence of the survivors.
    pub n_max_depth: u64,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            seed: 0,
            budget: 1_000,
            prec_confirm: 256,
            depth64: 256,
            prefilter_tol: 1e-9,
            max_norm: 32,
            n_max_depth: 1 << 20,
        }
    }
}

/// One confirmed discovery: candidate fraction, matched entry, relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfirmedHit {
    pub candidate_index: u64,
    pub literal: String,
    pub entry_id: String,
    /// `p·y + q·c + r = 0` with `y` the fraction's value, `c` the entry.
    pub relation: [BigInt; 3],
    /// Residual at twice the confirmation precision, short decimal form.
    pub residual: String,
}

impl ConfirmedHit {
    /// Machine line: `CONFIRMED<TAB>literal<TAB>relation<TAB>residual`.
    pub fn line(&self) -> String {
        let [p, q, r] = &self.relation;
        format!(
            "CONFIRMED\t{}\t{}*y + {}*{} + {} = 0\t{}",
            self.literal, p, q, self.entry_id, r, self.residual
        )
    }
}

/// Summary of a mining run.  The stage counters are monotone:
/// `n_generated ≥ n_converged64 ≥ n_prefilter_hits ≥ n_confirmed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MineReport {
    pub seed: u64,
    pub budget: u64,
    pub space: SearchSpace,
    pub n_generated: u64,
    pub n_converged64: u64,
    pub n_prefilter_hits: u64,
    pub n_confirmed: u64,
    pub confirmed: Vec<ConfirmedHit>,
}

impl fmt::Display for MineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "mine seed={} budget={} generated={} converged64={} prefilter_hits={} confirmed={}",
            self.seed,
            self.budget,
            self.n_generated,
            self.n_converged64,
            self.n_prefilter_hits,
            self.n_confirmed
        )?;
        for hit in &self.confirmed {
            writeln!(f, "{}", hit.line())?;
        }
        Ok(())
    }
}

/// Canonical key of a fraction under constant-scale equivalence: divide the
/// numerator rule by `c²` and the denominator rule by `c`, `c` the content
/// of the denominator rule, and render.  `a0` distinguishes otherwise-equal
/// tails.
fn canonical_key(cf: &Gcf) -> String {
    let scale = |rule: &TermRule, div: &num_rational::BigRational| -> TermRule {
        if div.numer() == &BigInt::from(0) {
            rule.clone()
        } else {
            rule.scale_by_rational(&div.recip())
        }
    };
    let content_a = content_of(cf.a_rule());
    let ca2 = &content_a * &content_a;
    let b_key = scale(cf.b_rule(), &ca2);
    let a_key = scale(cf.a_rule(), &content_a);
    format!("{}|{}|{}", cf.a0().render(), b_key.render(), a_key.render())
}

fn content_of(rule: &TermRule) -> num_rational::BigRational {
    // rules drawn by the miner are single rational polynomials
    rule.groups()
        .first()
        .map(|(_, p)| p.content())
        .unwrap_or_else(|| PolyQ::zero().content())
}

/// Run the full mining pipeline over `budget` candidates.
pub fn mine(space: &SearchSpace, db: &ConstDb, cfg: &MineConfig) -> Result<MineReport, MinerError> {
    space.validate()?;

    #[cfg(feature = "parallel")]
    let scans = scan_batch_parallel(
        space,
        db,
        cfg.seed,
        cfg.budget,
        cfg.depth64,
        cfg.prefilter_tol,
    );
    #[cfg(not(feature = "parallel"))]
    let scans = scan_batch_sequential(
        space,
        db,
        cfg.seed,
        cfg.budget,
        cfg.depth64,
        cfg.prefilter_tol,
    );

    let mut report = MineReport {
        seed: cfg.seed,
        budget: cfg.budget,
        space: space.clone(),
        n_generated: cfg.budget,
        n_converged64: 0,
        n_prefilter_hits: 0,
        n_confirmed: 0,
        confirmed: Vec::new(),
    };

    // confirmation runs sequentially in candidate order so reports are
    // deterministic regardless of the scanning back-end
    let mut seen = HashSet::new();
    for scan in &scans {
        if scan.stable {
            report.n_converged64 += 1;
        }
        if scan.hit_entries.is_empty() {
            continue;
        }
        report.n_prefilter_hits += 1;
        let cf = scan.cf.as_ref().expect("hits imply the fraction is kept");
        if !seen.insert(canonical_key(cf)) {
            continue; // equivalence class already confirmed or rejected
        }
        let rep = match converge_with(cf, 2 * cfg.prec_confirm, cfg.n_max_depth) {
            Ok(r) => r,
            Err(_) => continue,
        };
        if !rep.is_settled() {
            continue;
        }
        let mut any = false;
        for &entry_index in &scan.hit_entries {
            match db.confirm_match(&rep.value, entry_index, cfg.max_norm, cfg.prec_confirm)? {
                ConfirmOutcome::Confirmed(m) => {
                    any = true;
                    report.confirmed.push(ConfirmedHit {
                        candidate_index: scan.index,
                        literal: cf.render(),
                        entry_id: db.entries()[entry_index].id.clone(),
                        relation: m.relation,
                        residual: m.residual.to_decimal_string(3),
                    });
                }
                ConfirmOutcome::Unconfirmed => {}
            }
        }
        if any {
            report.n_confirmed += 1;
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
