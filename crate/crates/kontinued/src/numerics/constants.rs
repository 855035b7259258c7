//! Registry of named mathematical constants.
//!
//! Values are computed on demand at the requested precision and memoized per
//! thread under the key `(name, precision)`.  The registry covers the
//! constants that closed forms in this crate are built from: π, e, the golden
//! ratio, small square roots and logarithms, the lemniscate constant, Euler's
//! γ, Catalan's constant, and ζ(3).
//!
//! Slow-series constants use classical accelerated formulas:
//!
//! * `euler_gamma` — Brent–McMillan: `γ = A(n)/B(n) - ln n + O(e^(-4n))`
//!   where `A, B` are Bessel-type sums;
//! * `zeta3` — Apéry's series `ζ(3) = (5/2) Σ (-1)^(k-1) / (k³·binom(2k,k))`;
//! * `catalan` — `G = (3/8) Σ 1/((2k+1)²·binom(2k,k)) + (π/8)·ln(2+√3)`;
//! * `lemniscate` — `ϖ = π / agm(1, √2)`, with the gamma closed form
//!   `Γ(1/4)²/(2√(2π))` kept as a test cross-check.

use std::cell::RefCell;
use std::collections::HashMap;

use super::real::{with_consts, RM};
use super::{BigReal, NumericsError, Prec};

/// Names accepted by [`named_constant`], in registry order.
pub fn constant_names() -> Vec<&'static str> {
    vec![
        "pi",
        "e",
        "phi",
        "sqrt2",
        "sqrt3",
        "sqrt5",
        "ln2",
        "ln3",
        "lemniscate",
        "euler_gamma",
        "catalan",
        "zeta3",
    ]
}

thread_local! {
    static MEMO: RefCell<HashMap<(String, Prec), BigReal>> = RefCell::new(HashMap::new());
}

/// Looks up `name` and returns its value rounded to `p` bits.
pub fn named_constant(name: &str, p: Prec) -> Result<BigReal, NumericsError> {
    if let Some(v) = MEMO.with(|m| m.borrow().get(&(name.to_string(), p)).cloned()) {
        return Ok(v);
    }
    let v = compute(name, p)?;
    MEMO.with(|m| m.borrow_mut().insert((name.to_string(), p), v.clone()));
    Ok(v)
}

fn compute(name: &str, p: Prec) -> Result<BigReal, NumericsError> {
    let wp = p + 32;
    let sqrt_of = |n: u64| BigReal::from_u64(n, wp).sqrt(wp).expect("positive");
    Ok(match name {
        "pi" => with_consts(|cc| BigReal::from_raw(cc.pi(p, RM))),
        "e" => with_consts(|cc| BigReal::from_raw(cc.e(p, RM))),
        "phi" => BigReal::one(wp)
            .add(&sqrt_of(5), wp)
            .div(&BigReal::from_u64(2, wp), p),
        "sqrt2" => sqrt_of(2).with_prec(p),
        "sqrt3" => sqrt_of(3).with_prec(p),
        "sqrt5" => sqrt_of(5).with_prec(p),
        "ln2" => with_consts(|cc| BigReal::from_raw(cc.ln_2(p, RM))),
        "ln3" => BigReal::from_u64(3, wp).ln(p).expect("3 > 0"),
        "lemniscate" => {
            let pi = with_consts(|cc| BigReal::from_raw(cc.pi(wp, RM)));
            pi.div(&agm(&BigReal::one(wp), &sqrt_of(2), wp), p)
        }
        "euler_gamma" => euler_gamma(p),
        "catalan" => catalan(p),
        "zeta3" => zeta3(p),
        _ => return Err(NumericsError::UnknownConstant(name.to_string())),
    })
}

/// Arithmetic-geometric mean of two positive reals; quadratic convergence.
pub fn agm(a: &BigReal, b: &BigReal, p: Prec) -> BigReal {
    assert!(a.is_positive() && b.is_positive(), "agm needs positive inputs");
    let wp = p + 32;
    let mut x = a.with_prec(wp);
    let mut y = b.with_prec(wp);
    let scale = x.exponent().unwrap_or(0);
    for _ in 0..(64 + p.ilog2() as usize * 4) {
        let diff = x.sub(&y, wp).abs();
        if diff.le_pow2(scale - (p as i64) - 8) {
            break;
        }
        let am = x.add(&y, wp).div(&BigReal::from_u64(2, wp), wp);
        let gm = x.mul(&y, wp).sqrt(wp).expect("positive product");
        x = am;
        y = gm;
    }
    x.with_prec(p)
}

/// Brent–McMillan approximation of Euler's constant.
fn euler_gamma(p: Prec) -> BigReal {
    let wp = p + 48;
    // e^(-4n) ≤ 2^-(wp+8)
    let n = (((wp + 8) as f64) * std::f64::consts::LN_2 / 4.0).ceil() as u64 + 1;
    let n_sq = BigReal::from_u64(n * n, wp);
    let mut a = BigReal::one(wp); // (n^k/k!)²
    let mut h = BigReal::zero(wp); // harmonic number H_k
    let mut num = BigReal::zero(wp); // Σ a_k·H_k
    let mut den = BigReal::one(wp); // Σ a_k
    let mut k: u64 = 0;
    loop {
        k += 1;
        let k_sq = BigReal::from_u64(k * k, wp);
        a = a.mul(&n_sq, wp).div(&k_sq, wp);
        h = h.add(&BigReal::from_u64(k, wp).recip(wp), wp);
        num = num.add(&a.mul(&h, wp), wp);
        den = den.add(&a, wp);
        if k > 2 * n && a.le_pow2(den.exponent().unwrap_or(0) - (wp as i64) - 8) {
            break;
        }
    }
    let ln_n = BigReal::from_u64(n, wp).ln(wp).expect("n > 0");
    num.div(&den, wp).sub(&ln_n, p)
}

/// Catalan's constant via the accelerated central-binomial series.
fn catalan(p: Prec) -> BigReal {
    let wp = p + 48;
    // Σ 1/((2k+1)²·binom(2k,k)): ratio a_{k+1}/a_k = (2k+1)(k+1)/(2(2k+3)²)
    let mut a = BigReal::one(wp);
    let mut s = BigReal::one(wp);
    let mut k: u64 = 0;
    loop {
        let num = (2 * k + 1) * (k + 1);
        let den = 2 * (2 * k + 3) * (2 * k + 3);
        a = a
            .mul(&BigReal::from_u64(num, wp), wp)
            .div(&BigReal::from_u64(den, wp), wp);
        k += 1;
        s = s.add(&a, wp);
        if a.le_pow2(-(wp as i64) - 8) {
            break;
        }
    }
    let pi = with_consts(|cc| BigReal::from_raw(cc.pi(wp, RM)));
    let sqrt3 = BigReal::from_u64(3, wp).sqrt(wp).expect("positive");
    let ln_term = BigReal::from_u64(2, wp)
        .add(&sqrt3, wp)
        .ln(wp)
        .expect("2+√3 > 0");
    let eight = BigReal::from_u64(8, wp);
    s.mul(&BigReal::from_u64(3, wp), wp)
        .div(&eight, wp)
        .add(&pi.mul(&ln_term, wp).div(&eight, wp), p)
}

/// Apéry's series for ζ(3).
fn zeta3(p: Prec) -> BigReal {
    let wp = p + 48;
    // t_k = 1/(k³·binom(2k,k)), t_1 = 1/2; |t_{k+1}/t_k| = k³/((k+1)²·2·(2k+1))
    let mut t = BigReal::from_u64(2, wp).recip(wp);
    let mut s = t.clone();
    let mut k: u64 = 1;
    loop {
        let num = k * k * k;
        let den = (k + 1) * (k + 1) * 2 * (2 * k + 1);
        t = t
            .mul(&BigReal::from_u64(num, wp), wp)
            .div(&BigReal::from_u64(den, wp), wp);
        k += 1;
        // alternating: (-1)^(k-1)
        s = if k % 2 == 0 {
            s.sub(&t, wp)
        } else {
            s.add(&t, wp)
        };
        if t.le_pow2(-(wp as i64) - 8) {
            break;
        }
    }
    s.mul(&BigReal::from_u64(5, wp), wp)
        .div(&BigReal::from_u64(2, wp), p)
}
