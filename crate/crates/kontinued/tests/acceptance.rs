//! Acceptance gate: ten numbered criteria covering the identity catalogue,
//! the relation machinery, the miner, and the evaluator contracts.  Each
//! test prints exactly one `criterion N: PASS/FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`) and fails the build when
//! its criterion is not met.
//!
//! Every tolerance is pinned here as a named constant.  Values flow from
//! the library's own certificates: a fraction converged at 256 bits carries
//! a `2^(48−256)` doubling certificate, so demanding residuals at
//! `2^(−192)` leaves a 16-bit margin for closed-form rounding.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use kontinued::cf::{
    converge, converge_with, equivalence_scale, eval_backward, eval_lentz, parse_cf, PolyQ,
};
use kontinued::constdb::ConstDb;
use kontinued::identities::{
    self, classical_tanh_cf, euler_series_cf, first_crossing, sum_of_products_series, IdentityId,
    Params, SuiteCase, Verdict,
};
use kontinued::miner::{self, fast_eval64, MineConfig, SearchSpace};
use kontinued::numerics::{named_constant, BigReal, Prec};
use kontinued::pslq::{pslq, relation_residual, RelationStatus};
use kontinued::{CfStatus, ScaleValue};

// ---------------------------------------------------------------------------
// pinned tolerances and limits
// ---------------------------------------------------------------------------

/// Residual bound for every 256-bit grid verification: `2^(−192)`.
const RESIDUAL_EXP: i64 = -192;
/// Agreement bound for the equation 1 / equation 2 overlap.
const CROSS_CHECK_EXP: i64 = -192;
/// Reference-digit agreement: 50 decimal digits.
const REFERENCE_EXP: i64 = -166;
/// Depth budget for the slow hyperbolic-tangent fraction.
const DEPTH_CAP: u64 = 1 << 20;
/// Wall-clock budget for the largest grid (criterion 1).
const GRID_TIME_LIMIT: Duration = Duration::from_secs(120);
/// Wall-clock budget for each relation search (criterion 7).
const PSLQ_TIME_LIMIT: Duration = Duration::from_secs(1);
/// Residual bound for re-checking mined confirmations at 512 bits.
const MINE_RECHECK_EXP: i64 = -300;
/// Required fast-evaluator rate, evaluations per second per core.
const THROUGHPUT_FLOOR: f64 = 1e5;
/// Size of each property-test batch (criterion 10).
const PROPERTY_CASES: u64 = 1000;
/// Forward/backward agreement bound for candidates whose convergent
/// numerators and denominators never hit an exact zero (those that do
/// trigger the forward path's documented tiny-value substitution and are
/// screened out exactly beforehand).
const LENTZ_AGREE_EXP: i64 = -78;

fn conclude(n: u32, ok: bool, detail: &str) {
    let line = format!(
        "criterion {n}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    println!("{line}");
    assert!(ok, "{line}");
}

fn suite_for(id: IdentityId) -> Vec<SuiteCase> {
    identities::default_suite()
        .into_iter()
        .filter(|c| c.id == id)
        .collect()
}

/// Verify every case, returning `(pass, total, worst residual exponent)`.
fn run_grid(cases: &[SuiteCase], residual_exp: i64) -> (usize, usize, i64) {
    let mut pass = 0;
    let mut worst = i64::MIN;
    for case in cases {
        let outcome = identities::verify(case.id, &case.params, case.prec)
            .unwrap_or_else(|e| panic!("{} {}: {e}", case.id, case.params));
        let e = outcome.residual.exponent().unwrap_or(i64::MIN);
        worst = worst.max(e);
        if outcome.verdict == Verdict::Pass && outcome.residual.le_pow2(residual_exp) {
            pass += 1;
        } else {
            println!("  not passing: {outcome}");
        }
    }
    (pass, cases.len(), worst)
}

// ---------------------------------------------------------------------------
// criteria 1-6: the identity catalogue
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_gamma_quotient_grid() {
    let started = Instant::now();
    let cases = suite_for(IdentityId::GammaQuotient);
    let (pass, total, worst) = run_grid(&cases, RESIDUAL_EXP);
    let elapsed = started.elapsed();
    let ok = pass == total && total == 24 && elapsed <= GRID_TIME_LIMIT;
    conclude(
        1,
        ok,
        &format!(
            "eq1 grid {pass}/{total} pass, residuals ≤ 2^{worst}, {:.1?}",
            elapsed
        ),
    );
}

#[test]
fn criterion_02_lemniscate_grid_and_overlap() {
    let cases = suite_for(IdentityId::Lemniscate);
    let (pass, total, worst) = run_grid(&cases, RESIDUAL_EXP);
    // the α = 1 instances of equation 2 are the α = 2 instances of
    // equation 1; their certified fraction values must coincide
    let mut overlap_ok = true;
    for xi_src in ["1", "3/2", "2", "pi"] {
        let xi = ScaleValue::parse(xi_src).unwrap();
        let two = identities::verify(
            IdentityId::Lemniscate,
            &Params::alpha_xi(ScaleValue::parse("1").unwrap(), xi.clone()),
            256,
        )
        .unwrap();
        let one = identities::verify(
            IdentityId::GammaQuotient,
            &Params::alpha_xi(ScaleValue::parse("2").unwrap(), xi),
            256,
        )
        .unwrap();
        let diff = two.lhs.value.sub(&one.lhs.value, 320).abs();
        if !(two.verdict == Verdict::Pass
            && one.verdict == Verdict::Pass
            && diff.le_pow2(CROSS_CHECK_EXP))
        {
            overlap_ok = false;
            println!("  overlap mismatch at {}: Δ = {}", two.params, diff.to_decimal_string(3));
        }
    }
    let ok = pass == total && total == 16 && overlap_ok;
    conclude(
        2,
        ok,
        &format!("eq2 grid {pass}/{total} pass, residuals ≤ 2^{worst}, eq1 overlap agrees to 2^{CROSS_CHECK_EXP}"),
    );
}

#[test]
fn criterion_03_functional_relation_and_phi_powers() {
    let cases = suite_for(IdentityId::FunctionalRelation);
    let (pass, total, _) = run_grid(&cases, RESIDUAL_EXP);

    let phi_phi = identities::verify(IdentityId::PhiSelfPower, &Params::none(), 256).unwrap();
    let phi_two = identities::verify(IdentityId::PhiTwoOverPhi, &Params::none(), 256).unwrap();
    // frozen digits from an independent computation
    let ref_phi_phi = BigReal::from_decimal_str(
        "2.1784575679375991473725457028712458518070433016932546113477819",
        320,
    )
    .unwrap();
    let ref_phi_two = BigReal::from_decimal_str(
        "1.8126874577249661048858052481484372190821485504465063235108371",
        320,
    )
    .unwrap();
    let d4 = phi_phi.lhs.value.sub(&ref_phi_phi, 320).abs();
    let d5 = phi_two.lhs.value.sub(&ref_phi_two, 320).abs();
    let digits_ok = phi_phi.verdict == Verdict::Pass
        && phi_two.verdict == Verdict::Pass
        && d4.le_pow2(REFERENCE_EXP)
        && d5.le_pow2(REFERENCE_EXP);
    let ok = pass == total && total == 7 && digits_ok;
    conclude(
        3,
        ok,
        &format!(
            "eq3 grid {pass}/{total} pass; eq4/eq5 match 50 reference digits (Δ ≤ 2^{REFERENCE_EXP})"
        ),
    );
}

#[test]
fn criterion_04_self_power_families_terminate_exactly() {
    let g6 = suite_for(IdentityId::SelfPower);
    let g7 = suite_for(IdentityId::DoubleSelfPower);
    let (p6, t6, _) = run_grid(&g6, RESIDUAL_EXP);
    let (p7, t7, _) = run_grid(&g7, RESIDUAL_EXP);

    // integer parameters close over the rationals with finite depth
    let mut exact_ok = true;
    for (id, x, num, den) in [
        (IdentityId::SelfPower, 2i64, 2i64, 1i64),
        (IdentityId::SelfPower, 3, 9, 4),
        (IdentityId::SelfPower, 5, 625, 256),
        (IdentityId::DoubleSelfPower, 2, 7, 3),
        (IdentityId::DoubleSelfPower, 3, 211, 80),
    ] {
        let params = Params::with_x(ScaleValue::parse(&x.to_string()).unwrap());
        let case = identities::verify(id, &params, 256).unwrap();
        let want = BigReal::from_rational(
            &num_rational::BigRational::new(BigInt::from(num), BigInt::from(den)),
            320,
        );
        let diff = case.lhs.value.sub(&want, 320).abs();
        if case.lhs.status != CfStatus::FiniteTermination || !diff.le_pow2(-248) {
            exact_ok = false;
            println!("  {id} x={x}: status {}, Δ = {}", case.lhs.status, diff.to_decimal_string(3));
        }
    }
    let ok = p6 == t6 && t6 == 5 && p7 == t7 && t7 == 3 && exact_ok;
    conclude(
        4,
        ok,
        &format!("eq6 {p6}/{t6} and eq7 {p7}/{t7} pass; integer instances terminate on exact rationals"),
    );
}

#[test]
fn criterion_05_tanh_grid_and_classical_comparison() {
    let cases = suite_for(IdentityId::TanhCf);
    let mut pass = 0;
    let mut depth_ok = true;
    for case in &cases {
        let outcome = identities::verify(case.id, &case.params, case.prec).unwrap();
        if outcome.verdict == Verdict::Pass {
            pass += 1;
        }
        if outcome.lhs.depth_used > DEPTH_CAP {
            depth_ok = false;
        }
    }
    // at z = 1 the classical fraction needs strictly fewer terms
    let z = ScaleValue::parse("1").unwrap();
    let target = BigReal::one(256).tanh(256);
    let dc = first_crossing(&classical_tanh_cf(&z).unwrap(), &target, 128, 1 << 14)
        .unwrap()
        .expect("classical fraction reaches the target");
    let dp = first_crossing(
        &identities::build_cf(IdentityId::TanhCf, &Params::with_z(z)).unwrap(),
        &target,
        128,
        1 << 14,
    )
    .unwrap()
    .expect("quarter-pi fraction reaches the target");
    let ok = pass == cases.len() && cases.len() == 5 && depth_ok && dc < dp;
    conclude(
        5,
        ok,
        &format!(
            "eq8 grid {pass}/{} pass at 128 bits within depth 2^20; classical fraction needs {dc} < {dp} terms at z=1",
            cases.len()
        ),
    );
}

#[test]
fn criterion_06_sum_of_products_grid_and_euler_comparison() {
    let cases = suite_for(IdentityId::SumOfProducts);
    let (pass, total, worst) = run_grid(&cases, RESIDUAL_EXP);
    // convergence-rate comparison at α = 1, certified precision 256
    let alpha = ScaleValue::parse("1").unwrap();
    let target = sum_of_products_series(&alpha, 320).unwrap();
    let ours = identities::build_cf(IdentityId::SumOfProducts, &Params::with_alpha(alpha.clone()))
        .unwrap();
    let euler = euler_series_cf(&alpha).unwrap();
    let dp = first_crossing(&ours, &target, 256, 4096).unwrap().unwrap();
    let de = first_crossing(&euler, &target, 256, 4096).unwrap().unwrap();
    let ok = pass == total && total == 4 && dp < de;
    conclude(
        6,
        ok,
        &format!(
            "eq9 table {pass}/{total} pass, residuals ≤ 2^{worst}; fraction reaches 2^(−192) in {dp} < {de} terms"
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 7: integer-relation detection
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_pslq_recovers_and_excludes() {
    let p: Prec = 256;
    let phi = named_constant("phi", p).unwrap();
    let phi_sq = phi.mul(&phi, p);
    let t0 = Instant::now();
    let r1 = pslq(&[BigReal::one(p), phi.clone(), phi_sq], 10, p).unwrap();
    let t1 = t0.elapsed();
    let golden_ok = r1.is_found()
        && r1.coefficients == vec![BigInt::from(1), BigInt::from(1), BigInt::from(-1)]
        && t1 < PSLQ_TIME_LIMIT;

    let ln2 = named_constant("ln2", p).unwrap();
    let ln3 = named_constant("ln3", p).unwrap();
    let ln6 = ln2.add(&ln3, p);
    let t0 = Instant::now();
    let r2 = pslq(&[ln2, ln3, ln6], 10, p).unwrap();
    let t2 = t0.elapsed();
    let log_ok = r2.is_found()
        && r2.coefficients == vec![BigInt::from(1), BigInt::from(1), BigInt::from(-1)]
        && t2 < PSLQ_TIME_LIMIT;

    // (1, √2, √3) admits no small relation: library verdict plus an
    // exhaustive f64 scan of the coefficient box as an independent oracle
    let sqrt2 = named_constant("sqrt2", p).unwrap();
    let sqrt3 = named_constant("sqrt3", p).unwrap();
    let r3 = pslq(&[BigReal::one(p), sqrt2, sqrt3], 50, p).unwrap();
    let exhausted = matches!(r3.status, RelationStatus::Exhausted { norm_bound } if norm_bound > 50.0);
    let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
    let mut oracle_min = f64::INFINITY;
    for a in -50i64..=50 {
        for b in -50i64..=50 {
            for c in -50i64..=50 {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                oracle_min = oracle_min.min((a as f64 + b as f64 * s2 + c as f64 * s3).abs());
            }
        }
    }
    let oracle_ok = oracle_min > 1e-6;
    let ok = golden_ok && log_ok && exhausted && oracle_ok;
    conclude(
        7,
        ok,
        &format!(
            "(1,φ,φ²) and (ln2,ln3,ln6) → (1,1,−1) in {t1:.0?}/{t2:.0?}; (1,√2,√3) exhausted at 50, oracle min {oracle_min:.2e}"
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 8: mining end to end
// ---------------------------------------------------------------------------

fn shipped_db() -> ConstDb {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/base.tsv");
    ConstDb::load(&path).expect("shipped database loads")
}

#[test]
fn criterion_08_mining_rediscovers_golden_ratio() {
    let db = shipped_db();
    let space = SearchSpace::tiny();
    let cfg = MineConfig {
        seed: 1,
        budget: 10_000,
        ..MineConfig::default()
    };
    let report = miner::mine(&space, &db, &cfg).unwrap();

    let counters_ok = report.n_generated >= report.n_converged64
        && report.n_converged64 >= report.n_prefilter_hits
        && report.n_prefilter_hits >= report.n_confirmed
        && report.n_generated == 10_000;
    let phi_found = report
        .confirmed
        .iter()
        .any(|h| h.entry_id == "phi" && h.literal.contains("b(n) = 1; a(n) = 1"));

    // no false confirmations: every confirmed relation must survive an
    // independent recheck at 512 bits (noise-level matches cannot)
    let recheck_prec: Prec = 512;
    let mut rechecks_ok = true;
    for hit in &report.confirmed {
        let cf = parse_cf(&hit.literal).unwrap();
        let y = converge(&cf, recheck_prec).unwrap();
        let c = db
            .entry(&hit.entry_id)
            .unwrap()
            .value(2 * recheck_prec)
            .unwrap();
        let x = [y.value.clone(), c, BigReal::one(2 * recheck_prec)];
        let resid = relation_residual(&x, &hit.relation, recheck_prec);
        if !(y.is_settled() && resid.le_pow2(MINE_RECHECK_EXP)) {
            rechecks_ok = false;
            println!("  suspicious confirmation: {} vs {}", hit.line(), resid.to_decimal_string(3));
        }
    }

    let again = miner::mine(&space, &db, &cfg).unwrap();
    let deterministic = report == again && report.to_string() == again.to_string();

    let ok = counters_ok && phi_found && rechecks_ok && deterministic && !report.confirmed.is_empty();
    conclude(
        8,
        ok,
        &format!(
            "seed 1, 10⁴ candidates: {} confirmations, φ−1 rediscovered, all survive 512-bit recheck, reports bit-identical",
            report.confirmed.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 9: fast-path throughput
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_fast_evaluator_throughput() {
    let space = SearchSpace::default_space();
    let candidates: Vec<_> = (0..512).map(|i| miner::candidate(&space, 7, i)).collect();
    // warm-up pass, then measure single-threaded for at least 0.3 s
    let mut sink = 0f64;
    for cf in &candidates {
        sink += fast_eval64(cf, 256).0.abs().min(1.0);
    }
    let started = Instant::now();
    let mut evals = 0u64;
    while started.elapsed() < Duration::from_millis(300) {
        for cf in &candidates {
            sink += fast_eval64(cf, 256).0.abs().min(1.0);
            evals += 1;
        }
    }
    let rate = evals as f64 / started.elapsed().as_secs_f64();
    assert!(sink.is_finite());
    let waived = std::env::var_os("KONTINUED_WAIVE_THROUGHPUT").is_some();
    let ok = rate >= THROUGHPUT_FLOOR || waived;
    conclude(
        9,
        ok,
        &format!(
            "{rate:.2e} depth-256 evaluations/s on one core (floor {THROUGHPUT_FLOOR:.0e}{})",
            if waived && rate < THROUGHPUT_FLOOR {
                ", waived by KONTINUED_WAIVE_THROUGHPUT"
            } else {
                ""
            }
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 10: evaluator contracts
// ---------------------------------------------------------------------------

/// Whether any convergent numerator `A_n` or denominator `B_n` of the
/// fraction vanishes exactly for `1 ≤ n ≤ depth`, computed in exact
/// rational arithmetic (`A_n = a_n·A_{n−1} + b_n·A_{n−2}`, likewise `B`).
/// Rules with symbolic scale factors are reported as vanishing so callers
/// skip them; miner candidates are always pure rational.
fn continuant_vanishes(cf: &kontinued::Gcf, depth: u64) -> bool {
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    let Some(a0) = cf.a0().exact_at(0) else {
        return true;
    };
    let (mut a_prev, mut a_cur) = (BigRational::one(), a0);
    let (mut b_prev, mut b_cur) = (BigRational::zero(), BigRational::one());
    for n in 1..=depth {
        let rule_b = if n == 1 { cf.effective_b1() } else { cf.b_rule() };
        let rule_a = if n == 1 { cf.effective_a1() } else { cf.a_rule() };
        let (Some(bn), Some(an)) = (rule_b.exact_at(n as i64), rule_a.exact_at(n as i64)) else {
            return true;
        };
        let a_next = &an * &a_cur + &bn * &a_prev;
        let b_next = &an * &b_cur + &bn * &b_prev;
        if a_next.is_zero() || b_next.is_zero() {
            return true;
        }
        (a_prev, a_cur) = (a_cur, a_next);
        (b_prev, b_cur) = (b_cur, b_next);
    }
    false
}

#[test]
fn criterion_10_property_batches_and_residual_decay() {
    // (a) equivalence transformation preserves certified values
    let space = SearchSpace::default_space();
    let scales = [
        PolyQ::from_i64_coeffs(&[2]),
        PolyQ::from_i64_coeffs(&[3]),
        PolyQ::from_i64_coeffs(&[0, 1]),
        PolyQ::from_i64_coeffs(&[1, 1]),
        PolyQ::from_i64_coeffs(&[1, 2]),
        PolyQ::from_i64_coeffs(&[1, 0, 1]),
    ];
    // divergent random candidates are classified quickly under a shallow
    // depth cap; convergent ones certify 128 bits well before it
    let prop_cap: u64 = 1 << 12;
    let mut equivalence_compared = 0u64;
    let mut equivalence_bad = 0u64;
    for i in 0..PROPERTY_CASES {
        let cf = miner::candidate(&space, 1234, i);
        let Ok(r1) = converge_with(&cf, 128, prop_cap) else {
            continue;
        };
        if !r1.is_settled() {
            continue;
        }
        let scaled = equivalence_scale(&cf, &scales[(i % 6) as usize]).unwrap();
        let Ok(r2) = converge_with(&scaled, 128, prop_cap) else {
            continue;
        };
        if r2.is_settled() {
            equivalence_compared += 1;
            let diff = r1.value.sub(&r2.value, 192).abs();
            if !diff.div(&r1.value.norm_scale(192), 192).le_pow2(-78) {
                equivalence_bad += 1;
            }
        }
    }

    // (b) the forward Lentz iteration and the backward recurrence compute
    // the same truncation: fix the depth at 64 and compare the two
    // algorithms on it directly (converged runs stop earlier; the reported
    // depth is used for both sides).  Candidates with an exactly vanishing
    // convergent numerator or denominator are screened out in exact
    // rational arithmetic: on those the forward path substitutes a tiny
    // value of relative size `2^(−p/2)` by design, which caps agreement at
    // that scale instead of at rounding level.  Oscillating and divergent
    // candidates carry no comparable value and are skipped too.
    let mut lentz_compared = 0u64;
    let mut lentz_bad = 0u64;
    let mut lentz_worst = i64::MIN;
    for i in 0..PROPERTY_CASES {
        let cf = miner::candidate(&space, 5678, i);
        let Ok(rep) = eval_lentz(&cf, 128, 64) else {
            continue;
        };
        if !matches!(rep.status, CfStatus::Converged | CfStatus::DepthExhausted)
            || !rep.value.is_finite()
            || rep.depth_used == 0
            || continuant_vanishes(&cf, rep.depth_used)
        {
            continue;
        }
        let Ok(back) = eval_backward(&cf, rep.depth_used, 128) else {
            continue;
        };
        lentz_compared += 1;
        let diff = rep.value.sub(&back, 192).abs();
        let rel = diff.div(&rep.value.norm_scale(192), 192);
        lentz_worst = lentz_worst.max(rel.exponent().unwrap_or(i64::MIN));
        if !rel.le_pow2(LENTZ_AGREE_EXP) {
            lentz_bad += 1;
        }
    }

    // (c) doubling the precision shrinks every grid residual
    let mut decay_bad = 0u64;
    let mut decay_total = 0u64;
    for case in identities::default_suite() {
        let base = identities::verify(case.id, &case.params, case.prec).unwrap();
        let deep = identities::verify(case.id, &case.params, case.prec * 2).unwrap();
        decay_total += 1;
        let grew = deep
            .residual
            .sub(&base.residual, 2 * case.prec)
            .is_positive();
        if base.verdict != Verdict::Pass || deep.verdict != Verdict::Pass || grew {
            decay_bad += 1;
            println!("  decay violation: {base} vs {deep}");
        }
    }

    let ok = equivalence_bad == 0
        && equivalence_compared >= 300
        && lentz_bad == 0
        && lentz_compared >= 300
        && decay_bad == 0;
    conclude(
        10,
        ok,
        &format!(
            "equivalence {equivalence_compared} compared / {equivalence_bad} bad; lentz-vs-backward {lentz_compared} compared / {lentz_bad} bad (worst 2^{lentz_worst}); residual decay {decay_total} cases / {decay_bad} violations"
        ),
    );
}
