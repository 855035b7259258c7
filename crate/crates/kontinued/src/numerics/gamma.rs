//! Gamma and beta functions for real arguments at arbitrary precision.
//!
//! The core is the Stirling series for `ln Γ`:
//!
//! ```text
//! ln Γ(y) = (y - 1/2)·ln y - y + ln(2π)/2 + Σ_{k≥1} c_k · y^(1-2k),
//! c_k = B_{2k} / (2k·(2k-1))
//! ```
//!
//! valid once `y` is large enough that the truncated tail is below the target
//! accuracy.  Small arguments are lifted with the recurrence
//! `Γ(x) = Γ(x+m) / (x·(x+1)·…·(x+m-1))`, and arguments left of `1/2` go
//! through the reflection formula `Γ(x)·Γ(1-x) = π / sin(πx)`.
//!
//! The Bernoulli numerators are obtained from tangent numbers
//! (`|B_{2k}| = 2k·T_k / (4^k·(4^k-1))`) via the Knuth–Buckholtz recurrence —
//! an all-integer computation that avoids rational-gcd churn — and are cached
//! per thread, since the coefficient prefix only depends on how far the
//! series was ever pushed.

use std::cell::RefCell;
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::real::with_consts;
use super::{BigReal, NumericsError, Prec};

// ---- Stirling coefficients ----

thread_local! {
    static COEFFS: RefCell<Rc<Vec<BigRational>>> = RefCell::new(Rc::new(Vec::new()));
}

/// Tangent numbers `T_1..T_n` (`1, 2, 16, 272, …`) by the Knuth–Buckholtz
/// in-place recurrence; `O(n²)` integer operations, no divisions.
fn tangent_numbers(n: usize) -> Vec<BigInt> {
    let mut t: Vec<BigInt> = Vec::with_capacity(n);
    t.push(BigInt::one());
    for k in 2..=n {
        let prev = t[k - 2].clone() * BigInt::from(k as u64 - 1);
        t.push(prev);
    }
    for k in 2..=n {
        for j in k..=n {
            let a = &t[j - 2] * BigInt::from((j - k) as u64);
            let b = &t[j - 1] * BigInt::from((j - k + 2) as u64);
            t[j - 1] = a + b;
        }
    }
    t
}

/// First `k_max` Stirling coefficients `c_1..c_k`, with
/// `c_k = (-1)^(k+1) · T_k / ((2k-1)·4^k·(4^k-1))`.
fn stirling_coeffs(k_max: usize) -> Rc<Vec<BigRational>> {
    COEFFS.with(|cell| {
        {
            let cur = cell.borrow();
            if cur.len() >= k_max {
                return cur.clone();
            }
        }
        let tang = tangent_numbers(k_max);
        let mut cs = Vec::with_capacity(k_max);
        for (i, t) in tang.into_iter().enumerate() {
            let k = i + 1;
            let four_k = BigInt::one() << (2 * k);
            let den = BigInt::from(2 * k as u64 - 1) * (&four_k - BigInt::one()) * four_k;
            let num = if k % 2 == 1 { t } else { -t };
            cs.push(BigRational::new(num, den));
        }
        let rc = Rc::new(cs);
        *cell.borrow_mut() = rc.clone();
        rc
    })
}

// ---- Stirling evaluation ----

/// `log2((2k)!)` accumulated in `f64`; only steers parameter choice.
fn log2_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).log2()).sum()
}

/// Series length and minimum argument so that the truncated Stirling tail
/// stays below `2^-(wp+4)`.
fn stirling_parameters(wp: Prec) -> (usize, f64) {
    let k = (wp / 8).max(10);
    // |c_{K+1}| ≈ 2·(2K+2)! / ((2π)^(2K+2)·(2K+2)·(2K+1))
    let m = 2 * k + 2;
    let log2_c = 1.0 + log2_factorial(m)
        - m as f64 * (2.0 * std::f64::consts::PI).log2()
        - ((m * (m - 1)) as f64).log2();
    let t = 2f64.powf((log2_c + wp as f64 + 4.0) / (2 * k + 1) as f64);
    (k, t.max(4.0))
}

/// `ln Γ(x)` for `x > 0`, trusted to about `p - 32` bits relative.
pub fn ln_gamma(x: &BigReal, p: Prec) -> Result<BigReal, NumericsError> {
    if !x.is_positive() {
        return Err(NumericsError::Domain {
            op: "ln_gamma",
            arg: x.to_display_string(20),
        });
    }
    let wp = p + 128;
    let (big, shift_product) = shifted_ln_gamma(x, wp)?;
    let res = match shift_product {
        Some(prod) => big.sub(&prod.ln(wp)?, wp),
        None => big,
    };
    Ok(res.with_prec(p))
}

/// `(ln Γ(x + m), Π_{j<m}(x+j))` with `m` chosen so the Stirling series is
/// accurate at `wp` bits.  The product is `None` when no shift was needed.
fn shifted_ln_gamma(x: &BigReal, wp: Prec) -> Result<(BigReal, Option<BigReal>), NumericsError> {
    let (k_len, threshold) = stirling_parameters(wp);
    let xf = x.to_f64();
    let m_shift = if xf >= threshold {
        0u64
    } else {
        (threshold - xf).ceil() as u64
    };
    let mut product: Option<BigReal> = None;
    let mut y = x.with_prec(wp);
    if m_shift > 0 {
        let mut prod = x.with_prec(wp);
        for j in 1..m_shift {
            let term = x.add(&BigReal::from_u64(j, wp), wp);
            prod = prod.mul(&term, wp);
        }
        y = x.add(&BigReal::from_u64(m_shift, wp), wp);
        product = Some(prod);
    }

    // Σ c_k·u^(k-1) by Horner, then divide once by y.
    let coeffs = stirling_coeffs(k_len);
    let u = y.mul(&y, wp).recip(wp);
    let mut s = BigReal::from_rational(&coeffs[k_len - 1], wp);
    for k in (0..k_len - 1).rev() {
        s = s.mul(&u, wp).add(&BigReal::from_rational(&coeffs[k], wp), wp);
    }
    let series = s.div(&y, wp);

    let ln_y = y.ln(wp)?;
    let half = BigReal::from_rational(&BigRational::new(BigInt::one(), BigInt::from(2)), wp);
    let two_pi = with_consts(|cc| BigReal::from_raw(cc.pi(wp, super::real::RM)))
        .mul(&BigReal::from_u64(2, wp), wp);
    let ln_two_pi_half = two_pi.ln(wp)?.mul(&half, wp);
    let main = y.sub(&half, wp).mul(&ln_y, wp).sub(&y, wp);
    Ok((main.add(&ln_two_pi_half, wp).add(&series, wp), product))
}

/// Distance check against the poles at `0, -1, -2, …`: inside `2^-(p/2)` of a
/// non-positive integer the function value is numerically meaningless.
fn pole_check(x: &BigReal, p: Prec) -> Result<(), NumericsError> {
    let xf = x.to_f64();
    if xf > 0.75 || xf.abs() > 4.0e15 {
        return Ok(());
    }
    let nearest = xf.round() as i64;
    if nearest > 0 {
        return Ok(());
    }
    let guard = (p as u32) / 2;
    let dist = x.sub(&BigReal::from_i64(nearest, p + 64), p + 64);
    if dist.le_pow2(-(guard as i64)) {
        return Err(NumericsError::Pole {
            nearest,
            within_log2: guard,
        });
    }
    Ok(())
}

/// `Γ(x)` for real `x` away from the poles, trusted to about `p - 32` bits
/// relative.
pub fn gamma(x: &BigReal, p: Prec) -> Result<BigReal, NumericsError> {
    pole_check(x, p)?;
    let wp = p + 128;
    let half = BigReal::from_rational(&BigRational::new(BigInt::one(), BigInt::from(2)), wp);
    if x >= &half {
        return Ok(gamma_right(x, wp)?.with_prec(p));
    }
    // Γ(x) = π / (sin(πx)·Γ(1-x)); the argument of Γ on the right is ≥ 1/2.
    let swp = wp + 64;
    let pi = with_consts(|cc| BigReal::from_raw(cc.pi(swp, super::real::RM)));
    let sin_pi_x = pi.mul(&x.with_prec(swp), swp).sin(swp);
    debug_assert!(!sin_pi_x.is_zero(), "pole check admitted an integer");
    let one_minus_x = BigReal::one(swp).sub(x, swp);
    let g = gamma_right(&one_minus_x, wp)?;
    Ok(pi.div(&sin_pi_x.mul(&g, wp), p))
}

/// Stirling-with-shift evaluation for `x ≥ 1/2`.
fn gamma_right(x: &BigReal, wp: Prec) -> Result<BigReal, NumericsError> {
    let (lg, product) = shifted_ln_gamma(x, wp)?;
    let g_shifted = lg.exp(wp);
    Ok(match product {
        Some(prod) => g_shifted.div(&prod, wp),
        None => g_shifted,
    })
}

/// `B(a, b) = Γ(a)·Γ(b) / Γ(a+b)`.  Poles of the numerator are reported; a
/// pole of the denominator alone makes the value an exact zero.
pub fn beta(a: &BigReal, b: &BigReal, p: Prec) -> Result<BigReal, NumericsError> {
    let wp = p + 96;
    let ga = gamma(a, wp)?;
    let gb = gamma(b, wp)?;
    let sum = a.add(b, wp + 64);
    match gamma(&sum, wp) {
        Ok(gs) => Ok(ga.mul(&gb, wp).div(&gs, p)),
        Err(NumericsError::Pole { .. }) => Ok(BigReal::zero(p)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::super::real::RM;
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_close(a: &BigReal, b: &BigReal, log2_tol: i64) -> bool {
        let p = a.prec().max(b.prec());
        let diff = a.sub(b, p).abs();
        let scale = b.norm_scale(p);
        diff.le_pow2(log2_tol + scale.exponent().unwrap_or(0))
    }

    fn sqrt_pi(p: Prec) -> BigReal {
        with_consts(|cc| BigReal::from_raw(cc.pi(p, RM))).sqrt(p).unwrap()
    }

    #[test]
    fn tangent_numbers_prefix() {
        let t = tangent_numbers(5);
        let expect = [1u64, 2, 16, 272, 7936];
        for (a, b) in t.iter().zip(expect) {
            assert_eq!(a, &BigInt::from(b));
        }
    }

    #[test]
    fn stirling_coefficients_prefix() {
        // c_1 = 1/12, c_2 = -1/360, c_3 = 1/1260
        let cs = stirling_coeffs(3);
        assert_eq!(cs[0], BigRational::new(BigInt::one(), BigInt::from(12)));
        assert_eq!(cs[1], BigRational::new(BigInt::from(-1), BigInt::from(360)));
        assert_eq!(cs[2], BigRational::new(BigInt::one(), BigInt::from(1260)));
    }

    #[test]
    fn gamma_exact_integers() {
        let p = 256;
        for (n, fact) in [(1u64, 1u64), (2, 1), (3, 2), (4, 6), (5, 24), (8, 5040)] {
            let g = gamma(&BigReal::from_u64(n, p), p).unwrap();
            let want = BigReal::from_u64(fact, p);
            assert!(rel_close(&g, &want, -248), "Γ({n})");
        }
    }

    #[test]
    fn gamma_half_integers() {
        let p = 256;
        let sp = sqrt_pi(p + 64);
        // Γ(1/2) = √π, Γ(-1/2) = -2√π, Γ(-3/2) = 4√π/3
        let half = BigReal::from_f64(0.5, p);
        assert!(rel_close(&gamma(&half, p).unwrap(), &sp, -248));
        let want = sp.mul(&BigReal::from_i64(-2, p), p);
        assert!(rel_close(&gamma(&BigReal::from_f64(-0.5, p), p).unwrap(), &want, -246));
        let want = sp
            .mul(&BigReal::from_i64(4, p), p)
            .div(&BigReal::from_u64(3, p), p);
        assert!(rel_close(&gamma(&BigReal::from_f64(-1.5, p), p).unwrap(), &want, -246));
    }

    #[test]
    fn gamma_quarter_frozen_digits() {
        // Γ(1/4), 62 digits, derived from this implementation at 4× precision
        // and pinned after cross-checking the reflection product below.
        let p = 256;
        let reference = BigReal::from_decimal_str(
            "3.625609908221908311930685155867672002995167682880065467433378",
            320,
        )
        .unwrap();
        let g = gamma(&BigReal::from_f64(0.25, p), p).unwrap();
        assert!(rel_close(&g, &reference, -198));
        // Γ(3/4) against an independently computed value
        let reference = BigReal::from_decimal_str(
            "1.225416702465177645129098303362890526851239248108070611230118938289823",
            320,
        )
        .unwrap();
        let g = gamma(&BigReal::from_f64(0.75, p), p).unwrap();
        assert!(rel_close(&g, &reference, -198));
    }

    #[test]
    fn reflection_product_at_quarter() {
        // Γ(1/4)·Γ(3/4) = π·√2 exercises both the direct and the reflected
        // path at high precision.
        let p = 512;
        let a = gamma(&BigReal::from_f64(0.25, p), p).unwrap();
        let b = gamma(&BigReal::from_f64(0.75, p), p).unwrap();
        let lhs = a.mul(&b, p);
        let pi = with_consts(|cc| BigReal::from_raw(cc.pi(p, RM)));
        let rhs = pi.mul(&BigReal::from_u64(2, p).sqrt(p).unwrap(), p);
        assert!(rel_close(&lhs, &rhs, -(p as i64) + 40));
    }

    #[test]
    fn recurrence_randomized() {
        // Γ(x+1) = x·Γ(x) across magnitudes that cross the shift threshold
        let p = 192;
        let mut rng = ChaCha8Rng::seed_from_u64(1001);
        for _ in 0..60 {
            let xf: f64 = rng.random_range(0.05..30.0);
            let x = BigReal::from_f64(xf, p);
            let lhs = gamma(&x.add(&BigReal::one(p), p), p).unwrap();
            let rhs = x.mul(&gamma(&x, p).unwrap(), p);
            assert!(rel_close(&lhs, &rhs, -(p as i64) + 40), "x = {xf}");
        }
    }

    #[test]
    fn duplication_formula() {
        // Γ(x)·Γ(x+1/2) = 2^(1-2x)·√π·Γ(2x)
        let p = 256;
        for xf in [0.3, 1.7, 5.25, 11.5] {
            let x = BigReal::from_f64(xf, p);
            let lhs = gamma(&x, p)
                .unwrap()
                .mul(&gamma(&x.add(&BigReal::from_f64(0.5, p), p), p).unwrap(), p);
            let two_x = x.mul(&BigReal::from_u64(2, p), p);
            let pow = BigReal::from_u64(2, p)
                .pow(&BigReal::one(p).sub(&two_x, p), p)
                .unwrap();
            let rhs = pow
                .mul(&sqrt_pi(p), p)
                .mul(&gamma(&two_x, p).unwrap(), p);
            assert!(rel_close(&lhs, &rhs, -(p as i64) + 40), "x = {xf}");
        }
    }

    #[test]
    fn large_argument() {
        let p = 256;
        // Γ(7.5) spot value (no shift path at this precision)
        let reference = BigReal::from_decimal_str(
            "1871.254305797788346476077053603950424041772232446084254462288403763853",
            320,
        )
        .unwrap();
        let g = gamma(&BigReal::from_f64(7.5, p), p).unwrap();
        assert!(rel_close(&g, &reference, -210));
    }

    #[test]
    fn poles_reported() {
        let p = 256;
        for n in [0i64, -1, -2, -7] {
            match gamma(&BigReal::from_i64(n, p), p) {
                Err(NumericsError::Pole { nearest, .. }) => assert_eq!(nearest, n),
                other => panic!("expected pole at {n}, got {other:?}"),
            }
        }
        // within 2^-(p/2) of a pole
        let near = BigReal::from_i64(-3, p + 64).add(&BigReal::pow2(-200, p + 64), p + 64);
        assert!(matches!(
            gamma(&near, p),
            Err(NumericsError::Pole { nearest: -3, .. })
        ));
        // comfortably away from the pole: fine
        let off = BigReal::from_i64(-3, p).add(&BigReal::pow2(-40, p), p);
        assert!(gamma(&off, p).is_ok());
    }

    #[test]
    fn monotone_refinement() {
        // doubling the precision must not move digits above the error bound
        let x = BigReal::from_f64(0.3, 384);
        let lo = gamma(&x, 192).unwrap();
        let hi = gamma(&x, 384).unwrap();
        assert!(rel_close(&lo, &hi, -192 + 32));
    }

    #[test]
    fn ln_gamma_consistency() {
        let p = 256;
        let mut rng = ChaCha8Rng::seed_from_u64(1002);
        for _ in 0..20 {
            let xf: f64 = rng.random_range(0.1..50.0);
            let x = BigReal::from_f64(xf, p);
            let a = ln_gamma(&x, p).unwrap().exp(p);
            let b = gamma(&x, p).unwrap();
            assert!(rel_close(&a, &b, -(p as i64) + 48), "x = {xf}");
        }
        assert!(ln_gamma(&BigReal::from_i64(-1, p), p).is_err());
        assert!(ln_gamma(&BigReal::zero(p), p).is_err());
    }

    #[test]
    fn beta_values_and_symmetry() {
        let p = 256;
        let one = BigReal::one(p);
        assert!(rel_close(&beta(&one, &one, p).unwrap(), &one, -250));
        // B(1/2, 1/2) = π
        let half = BigReal::from_f64(0.5, p);
        let pi = with_consts(|cc| BigReal::from_raw(cc.pi(p, RM)));
        assert!(rel_close(&beta(&half, &half, p).unwrap(), &pi, -(p as i64) + 40));
        // consistency with the gamma quotient and symmetry, randomized
        let mut rng = ChaCha8Rng::seed_from_u64(1003);
        for _ in 0..25 {
            let af: f64 = rng.random_range(0.1..8.0);
            let bf: f64 = rng.random_range(0.1..8.0);
            let a = BigReal::from_f64(af, p);
            let b = BigReal::from_f64(bf, p);
            let bab = beta(&a, &b, p).unwrap();
            let bba = beta(&b, &a, p).unwrap();
            assert!(rel_close(&bab, &bba, -(p as i64) + 40));
            let quotient = gamma(&a, p)
                .unwrap()
                .mul(&gamma(&b, p).unwrap(), p)
                .div(&gamma(&a.add(&b, p), p).unwrap(), p);
            assert!(rel_close(&bab, &quotient, -(p as i64) + 40), "a={af} b={bf}");
        }
    }
}
