//! `BigReal`: a real number of explicit binary precision.
//!
//! Thin wrapper around `astro_float::BigFloat` that (a) keeps every operation
//! explicit about its target precision, (b) never lets NaN or infinity escape
//! (domain violations are reported as [`NumericsError`] before the backend is
//! called), and (c) adds the exact integer/rational bridges and decimal
//! rendering the rest of the crate needs.

use std::cell::RefCell;
use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint, Sign as IntSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{NumericsError, Prec, MIN_PREC};

/// Rounding mode used everywhere; round-to-nearest-even keeps results
/// deterministic and error analysis standard.
pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache allocation"));
}

/// Runs `f` with the per-thread backend constants cache (π, e, ln 2, …).
pub(crate) fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

fn clamp_prec(p: Prec) -> Prec {
    p.max(MIN_PREC)
}

/// A finite real number carrying its own binary precision.
///
/// Arithmetic methods take the precision of the *result*; inputs of differing
/// precision are fine.  Comparison is by numeric value, so `2` at 64 bits
/// equals `2` at 1024 bits.
#[derive(Debug, Clone)]
pub struct BigReal(BigFloat);

impl BigReal {
    // ---- construction ----

    pub fn zero(p: Prec) -> Self {
        BigReal(BigFloat::new(clamp_prec(p)))
    }

    pub fn one(p: Prec) -> Self {
        Self::from_i64(1, p)
    }

    pub fn from_i64(v: i64, p: Prec) -> Self {
        let s = if v < 0 { Sign::Neg } else { Sign::Pos };
        Self::from_word_signed(v.unsigned_abs(), s, p)
    }

    pub fn from_u64(v: u64, p: Prec) -> Self {
        Self::from_word_signed(v, Sign::Pos, p)
    }

    // `from_i128`/`from_u128` reject precisions under 128 bits, so single-word
    // integers go through `from_words` (value = w·2^(e-64) with e = 64).
    fn from_word_signed(w: u64, s: Sign, p: Prec) -> Self {
        if w == 0 {
            return Self::zero(p);
        }
        let x = BigFloat::from_words(&[w], s, 64);
        debug_assert!(!x.is_nan());
        BigReal(x)
    }

    /// Exact conversion; `p` only sets the minimum carried precision.
    pub fn from_f64(v: f64, p: Prec) -> Self {
        assert!(v.is_finite(), "BigReal::from_f64 on non-finite input");
        BigReal(BigFloat::from_f64(v, clamp_prec(p).max(64)))
    }

    /// Exact conversion: the full magnitude of `n` is kept regardless of `p`.
    pub fn from_bigint(n: &BigInt, p: Prec) -> Self {
        let (sign, digits) = n.to_u64_digits();
        if digits.is_empty() {
            return Self::zero(p);
        }
        let s = if sign == IntSign::Minus { Sign::Neg } else { Sign::Pos };
        let e = 64i64 * digits.len() as i64;
        assert!(e <= i32::MAX as i64, "integer too large for exponent range");
        let x = BigFloat::from_words(&digits, s, e as i32);
        debug_assert!(!x.is_nan());
        BigReal(x)
    }

    /// `q` rounded once to `p` bits.
    pub fn from_rational(q: &BigRational, p: Prec) -> Self {
        let num = Self::from_bigint(q.numer(), p);
        let den = Self::from_bigint(q.denom(), p);
        num.div(&den, p)
    }

    /// Exactly `2^e`.
    pub fn pow2(e: i64, p: Prec) -> Self {
        assert!(e > i32::MIN as i64 + 2 && e < i32::MAX as i64 - 2);
        let mut x = BigFloat::from_word(1, clamp_prec(p));
        // 1 is stored as 0.5·2^1; shifting the exponent rescales the value.
        x.set_exponent((e + 1) as i32);
        BigReal(x)
    }

    pub(crate) fn from_raw(x: BigFloat) -> Self {
        debug_assert!(!x.is_nan() && !x.is_inf(), "non-finite BigReal");
        BigReal(x)
    }

    // ---- inspection ----

    pub fn prec(&self) -> Prec {
        self.0.precision().unwrap_or(MIN_PREC)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero() && self.0.is_positive()
    }

    /// True if the value is an exact integer.
    pub fn is_integer(&self) -> bool {
        self.0.is_int()
    }

    /// False for NaN and ±∞ (which can arise from exponent-range overflow
    /// in pathological evaluations, never from ordinary rounding).
    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    /// Binary magnitude: the value lies in `[2^(e-1), 2^e)`.  `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            self.0.exponent().map(|e| e as i64)
        }
    }

    /// `|self| <= 2^e`, decided exactly.
    pub fn le_pow2(&self, e: i64) -> bool {
        match self.exponent() {
            None => true,
            Some(ex) if ex <= e => true,
            Some(ex) if ex == e + 1 => {
                // |v| ∈ [2^e, 2^(e+1)): equality only at the left endpoint.
                self.abs() == Self::pow2(e, MIN_PREC)
            }
            _ => false,
        }
    }

    /// `max(1, |self|)` — the scale factor used in relative-error thresholds.
    pub fn norm_scale(&self, p: Prec) -> Self {
        let a = self.abs();
        if a >= Self::one(MIN_PREC) {
            a.with_prec(p)
        } else {
            Self::one(p)
        }
    }

    // ---- precision management ----

    /// Rounds to `p` bits.
    pub fn with_prec(&self, p: Prec) -> Self {
        let mut x = self.0.clone();
        x.set_precision(clamp_prec(p), RM)
            .expect("precision is clamped to the valid range");
        debug_assert!(!x.is_nan());
        BigReal(x)
    }

    // ---- arithmetic ----

    pub fn add(&self, o: &Self, p: Prec) -> Self {
        Self::from_raw(self.0.add(&o.0, clamp_prec(p), RM))
    }

    pub fn sub(&self, o: &Self, p: Prec) -> Self {
        Self::from_raw(self.0.sub(&o.0, clamp_prec(p), RM))
    }

    pub fn mul(&self, o: &Self, p: Prec) -> Self {
        Self::from_raw(self.0.mul(&o.0, clamp_prec(p), RM))
    }

    /// Panics on a zero divisor: callers in evaluation loops test for zero
    /// first and report structured errors.
    pub fn div(&self, o: &Self, p: Prec) -> Self {
        assert!(!o.is_zero(), "BigReal::div by zero");
        Self::from_raw(self.0.div(&o.0, clamp_prec(p), RM))
    }

    pub fn recip(&self, p: Prec) -> Self {
        assert!(!self.is_zero(), "BigReal::recip of zero");
        Self::from_raw(self.0.reciprocal(clamp_prec(p), RM))
    }

    pub fn abs(&self) -> Self {
        BigReal(self.0.abs())
    }

    pub fn neg(&self) -> Self {
        BigReal(self.0.neg())
    }

    /// Integer power with sign handling; `0^0 = 1`, `0^negative` panics.
    pub fn powi(&self, n: i64, p: Prec) -> Self {
        let p = clamp_prec(p);
        if n == 0 {
            return Self::one(p);
        }
        if self.is_zero() {
            assert!(n > 0, "BigReal::powi zero base, negative exponent");
            return Self::zero(p);
        }
        let mag = n.unsigned_abs() as usize;
        if n > 0 {
            Self::from_raw(self.0.powi(mag, p, RM))
        } else {
            Self::from_raw(self.0.powi(mag, p + 64, RM)).recip(p)
        }
    }

    pub fn sqrt(&self, p: Prec) -> Result<Self, NumericsError> {
        if self.is_negative() {
            return Err(NumericsError::Domain {
                op: "sqrt",
                arg: self.to_display_string(20),
            });
        }
        Ok(Self::from_raw(self.0.sqrt(clamp_prec(p), RM)))
    }

    pub fn exp(&self, p: Prec) -> Self {
        with_consts(|cc| Self::from_raw(self.0.exp(clamp_prec(p), RM, cc)))
    }

    pub fn ln(&self, p: Prec) -> Result<Self, NumericsError> {
        if !self.is_positive() {
            return Err(NumericsError::Domain {
                op: "ln",
                arg: self.to_display_string(20),
            });
        }
        Ok(with_consts(|cc| {
            Self::from_raw(self.0.ln(clamp_prec(p), RM, cc))
        }))
    }

    /// Real power `self^e`.  Negative bases are allowed only for integer
    /// exponents; `0^e` requires `e > 0`.
    pub fn pow(&self, e: &Self, p: Prec) -> Result<Self, NumericsError> {
        let p = clamp_prec(p);
        if self.is_zero() {
            if e.is_positive() {
                return Ok(Self::zero(p));
            }
            return Err(NumericsError::Domain {
                op: "pow",
                arg: format!("0^{}", e.to_display_string(20)),
            });
        }
        if e.is_integer() {
            if let Some(n) = e.to_i64_exact() {
                return Ok(self.powi(n, p));
            }
        }
        if self.is_negative() {
            return Err(NumericsError::Domain {
                op: "pow",
                arg: format!(
                    "{}^{}",
                    self.to_display_string(20),
                    e.to_display_string(20)
                ),
            });
        }
        Ok(with_consts(|cc| {
            Self::from_raw(self.0.pow(&e.0, p, RM, cc))
        }))
    }

    pub fn tanh(&self, p: Prec) -> Self {
        with_consts(|cc| Self::from_raw(self.0.tanh(clamp_prec(p), RM, cc)))
    }

    pub fn sin(&self, p: Prec) -> Self {
        with_consts(|cc| Self::from_raw(self.0.sin(clamp_prec(p), RM, cc)))
    }

    // ---- conversions ----

    /// Nearest `f64` (up to one truncation of the mantissa tail); saturates
    /// to ±∞ outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (words, _nbits, sign, e, _) = self.0.as_raw_parts().expect("finite");
        let top = *words.last().expect("nonempty mantissa");
        // value = 0.m · 2^e with the top mantissa bit in position 63.
        let frac = (top >> 11) as f64 / (1u64 << 53) as f64;
        let mag = frac * exp2i(e as i64);
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// The exact value of `self` when it is an integer fitting `i64`.
    pub fn to_i64_exact(&self) -> Option<i64> {
        if !self.0.is_int() {
            return None;
        }
        let q = self.to_dyadic();
        if !q.is_integer() {
            return None;
        }
        let n = q.to_integer();
        i64::try_from(&n).ok()
    }

    /// Exact rational value (every finite float is dyadic).
    pub fn to_dyadic(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let (m, shift) = self.mantissa_shift();
        let m = BigInt::from(m);
        let m = if self.is_negative() { -m } else { m };
        if shift >= 0 {
            BigRational::from_integer(m << shift as usize)
        } else {
            BigRational::new(m, BigInt::one() << (-shift) as usize)
        }
    }

    /// `round(self · 2^frac_bits)` as an exact integer (ties away from zero).
    pub fn to_scaled_int(&self, frac_bits: i64) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        let (m, shift) = self.mantissa_shift();
        let sh = shift + frac_bits;
        let mag = if sh >= 0 {
            m << sh as usize
        } else {
            let down = (-sh) as usize;
            (m + (BigUint::one() << (down - 1))) >> down
        };
        let mag = BigInt::from(mag);
        if self.is_negative() {
            -mag
        } else {
            mag
        }
    }

    /// `|self| = m · 2^shift` with `m` an exact integer.
    fn mantissa_shift(&self) -> (BigUint, i64) {
        let (words, _nbits, _sign, e, _) = self.0.as_raw_parts().expect("finite");
        let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        let m = BigUint::from_bytes_le(&bytes);
        (m, e as i64 - 64 * words.len() as i64)
    }

    // ---- decimal rendering and parsing ----

    /// Canonical scientific form with exactly `digits` significant digits,
    /// e.g. `-2.6220575542921198e+0`.  Digits are round-to-nearest-even in
    /// decimal; rendering the same value at the same length is reproducible
    /// bit-for-bit.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        assert!(digits >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let (m, shift) = self.mantissa_shift();
        let bits = m.bits() as i64 + shift; // |v| ∈ [2^(bits-1), 2^bits)
        let mut k = digits as i64 - 1 - ((bits - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let lo = BigUint::from(10u32).pow((digits - 1) as u32);
        let hi = &lo * 10u32;
        // The estimate of the decimal magnitude is within ±1; re-round at an
        // adjusted scale rather than dividing the result (avoids double
        // rounding).
        let mut d = scale_round(&m, shift, k);
        for _ in 0..3 {
            if d >= hi {
                k -= 1;
            } else if d < lo {
                k += 1;
            } else {
                break;
            }
            d = scale_round(&m, shift, k);
        }
        debug_assert!(d >= lo && d < hi, "decimal scaling failed to settle");
        let ds = d.to_str_radix(10);
        let e10 = digits as i64 - 1 - k;
        let sign = if self.is_negative() { "-" } else { "" };
        let esign = if e10 < 0 { "-" } else { "+" };
        if ds.len() == 1 {
            format!("{sign}{ds}e{esign}{}", e10.abs())
        } else {
            format!("{sign}{}.{}e{esign}{}", &ds[..1], &ds[1..], e10.abs())
        }
    }

    /// Positional form when the exponent is moderate, scientific otherwise.
    pub fn to_display_string(&self, digits: usize) -> String {
        assert!(digits >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let sci = self.to_decimal_string(digits);
        let (mant, e10) = sci.split_once('e').expect("scientific form");
        let e10: i64 = e10.parse().expect("exponent");
        if e10 < -4 || e10 >= digits as i64 {
            return sci;
        }
        let neg = mant.starts_with('-');
        let ds: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
        let sign = if neg { "-" } else { "" };
        if e10 >= 0 {
            let ip = e10 as usize + 1;
            let (int_part, frac_part) = ds.split_at(ip.min(ds.len()));
            let frac_part = frac_part.trim_end_matches('0');
            if frac_part.is_empty() {
                format!("{sign}{int_part}")
            } else {
                format!("{sign}{int_part}.{frac_part}")
            }
        } else {
            let zeros = "0".repeat((-e10 - 1) as usize);
            format!("{sign}0.{zeros}{ds}")
        }
    }

    /// Parses decimal notation (`-12.34e-5`, `42`, `0.5`) with at most one
    /// rounding into `p` bits.
    pub fn from_decimal_str(s: &str, p: Prec) -> Result<Self, NumericsError> {
        let p = clamp_prec(p);
        let bad = |reason: &str| NumericsError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (num_part, exp_part) = match t.split_once(['e', 'E']) {
            Some((a, b)) => (a, Some(b)),
            None => (t, None),
        };
        let (int_part, frac_part) = match num_part.split_once('.') {
            Some((a, b)) => (a, b),
            None => (num_part, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad("no digits"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad("invalid digit"));
        }
        let digits: String = format!("{int_part}{frac_part}");
        let mantissa = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(|| bad("no digits"))?;
        let exp10: i64 = match exp_part {
            Some(e) if !e.is_empty() => e
                .parse::<i64>()
                .map_err(|_| bad("invalid exponent"))?,
            Some(_) => return Err(bad("empty exponent")),
            None => 0,
        };
        let exp10 = exp10 - frac_part.len() as i64;
        let m = Self::from_bigint(&mantissa, p);
        let wp = p + 64;
        let val = match exp10.cmp(&0) {
            Ordering::Equal => m.with_prec(p),
            Ordering::Greater => {
                let pw = Self::from_u64(10, wp).powi(exp10, wp);
                m.mul(&pw, p)
            }
            Ordering::Less => {
                let pw = Self::from_u64(10, wp).powi(-exp10, wp);
                m.div(&pw, p)
            }
        };
        Ok(if neg { val.neg() } else { val })
    }
}

/// `round_half_even(m · 2^shift · 10^k)`; `m` nonzero.
fn scale_round(m: &BigUint, shift: i64, k: i64) -> BigUint {
    let mut num = m.clone();
    let mut den = BigUint::one();
    if k >= 0 {
        num *= BigUint::from(10u32).pow(k as u32);
    } else {
        den *= BigUint::from(10u32).pow((-k) as u32);
    }
    if shift >= 0 {
        num <<= shift as usize;
    } else {
        den <<= (-shift) as usize;
    }
    let (q, r) = num.div_rem(&den);
    let r2 = r << 1;
    if r2 > den || (r2 == den && q.is_odd()) {
        q + 1u32
    } else {
        q
    }
}

/// `2^e` in `f64`, saturating.
fn exp2i(e: i64) -> f64 {
    if e > 1100 {
        f64::INFINITY
    } else if e < -1100 {
        0.0
    } else {
        2f64.powi(e as i32)
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl std::fmt::Display for BigReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let digits = super::trusted_decimal_digits(self.prec()).max(17);
        f.write_str(&self.to_display_string(digits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_bridges_are_exact() {
        let p = 192;
        let big = BigInt::from(u64::MAX) * BigInt::from(3);
        let x = BigReal::from_bigint(&big, p);
        assert_eq!(x.to_dyadic(), BigRational::from_integer(big));
        let y = BigReal::from_i64(-41, p);
        assert_eq!(y.to_i64_exact(), Some(-41));
        assert!((BigReal::from_u64(1, p).to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pow2_and_le_pow2_boundaries() {
        let p = 128;
        let x = BigReal::pow2(-100, p);
        assert!(x.le_pow2(-100));
        assert!(!x.le_pow2(-101));
        assert!(BigReal::zero(p).le_pow2(-10_000));
        let y = BigReal::from_u64(3, p); // 3 ∈ (2^1, 2^2)
        assert!(y.le_pow2(2));
        assert!(!y.le_pow2(1));
    }

    #[test]
    fn rational_conversion_round_trips() {
        let p = 256;
        let q = BigRational::new(BigInt::from(-355), BigInt::from(113));
        let x = BigReal::from_rational(&q, p);
        let diff = x.sub(&BigReal::from_rational(&q, p + 128), p + 128).abs();
        assert!(diff.le_pow2(-(p as i64) + 4));
        // dyadic rationals are exact
        let d = BigRational::new(BigInt::from(7), BigInt::from(32));
        assert_eq!(BigReal::from_rational(&d, p).to_dyadic(), d);
    }

    #[test]
    fn decimal_render_known_values() {
        let p = 256;
        let x = BigReal::from_rational(
            &BigRational::new(BigInt::from(1), BigInt::from(3)),
            p,
        );
        assert_eq!(x.to_decimal_string(10), "3.333333333e-1");
        assert_eq!(x.to_display_string(10), "0.3333333333");
        let y = BigReal::from_i64(-1250, p);
        assert_eq!(y.to_decimal_string(3), "-1.25e+3");
        assert_eq!(y.to_display_string(8), "-1250");
        assert_eq!(BigReal::zero(p).to_decimal_string(5), "0");
        // round-half-even on an exact tie: 0.15 → "2e-1" would be half-up;
        // 0.15 is not exactly representable, so use a dyadic tie: 2.5 → "2"
        let t = BigReal::from_rational(&BigRational::new(BigInt::from(5), BigInt::from(2)), p);
        assert_eq!(t.to_decimal_string(1), "2e+0");
        let t = BigReal::from_rational(&BigRational::new(BigInt::from(7), BigInt::from(2)), p);
        assert_eq!(t.to_decimal_string(1), "4e+0");
    }

    #[test]
    fn decimal_parse_and_round_trip() {
        let p = 320;
        for s in [
            "1",
            "-42",
            "0.5",
            "3.14159265358979323846264338327950288",
            "-6.02e23",
            "1.6e-35",
            "+7.25",
        ] {
            let x = BigReal::from_decimal_str(s, p).expect(s);
            let back = BigReal::from_decimal_str(&x.to_decimal_string(60), p).expect("round trip");
            let scale = x.norm_scale(p);
            let diff = x.sub(&back, p).abs();
            // 60 digits ≈ 199 bits; the round trip must agree to ~190 bits
            assert!(
                diff.le_pow2(-190 + scale.exponent().unwrap_or(0)),
                "round trip drift for {s}"
            );
        }
        assert!(BigReal::from_decimal_str("abc", p).is_err());
        assert!(BigReal::from_decimal_str("1.2.3", p).is_err());
        assert!(BigReal::from_decimal_str("1e", p).is_err());
        assert!(BigReal::from_decimal_str("", p).is_err());
    }

    #[test]
    fn dyadic_round_trip_exact() {
        // parsing a decimal rendering of a dyadic value at enough digits
        // reproduces it exactly
        let p = 128;
        let x = BigReal::from_rational(
            &BigRational::new(BigInt::from(-123_456_789), BigInt::from(1) << 40),
            p,
        );
        let s = x.to_decimal_string(60);
        let y = BigReal::from_decimal_str(&s, 256).unwrap();
        // x has ≤ 68 significant bits ≈ 21 digits; 60 digits pin it exactly,
        // and parsing rounds back to the same dyadic
        assert_eq!(x.to_dyadic(), y.with_prec(128).to_dyadic());
    }

    #[test]
    fn scaled_int_rounding() {
        let p = 128;
        let x = BigReal::from_rational(&BigRational::new(BigInt::from(5), BigInt::from(4)), p);
        assert_eq!(x.to_scaled_int(2), BigInt::from(5)); // 1.25·4
        assert_eq!(x.to_scaled_int(1), BigInt::from(3)); // 2.5 rounds away
        assert_eq!(x.neg().to_scaled_int(1), BigInt::from(-3));
        assert_eq!(x.to_scaled_int(0), BigInt::from(1)); // 1.25 rounds down
    }

    #[test]
    fn exponent_window() {
        let p = 128;
        for (v, e) in [(1.0, 1), (0.5, 0), (0.75, 0), (2.0, 2), (5.0, 3)] {
            let x = BigReal::from_f64(v, p);
            assert_eq!(x.exponent(), Some(e), "value {v}");
            // |v| ∈ [2^(e-1), 2^e)
            assert!(v < 2f64.powi(e as i32) && v >= 2f64.powi(e as i32 - 1));
        }
    }

    #[test]
    fn elementary_functions_sane() {
        let p = 256;
        let two = BigReal::from_u64(2, p);
        let e1 = BigReal::one(p).exp(p);
        let ln_e = e1.ln(p).unwrap();
        assert!(ln_e.sub(&BigReal::one(p), p).abs().le_pow2(-250));
        let r2 = two.sqrt(p).unwrap();
        assert!(r2.mul(&r2, p).sub(&two, p).abs().le_pow2(-250));
        assert!(BigReal::from_i64(-2, p).sqrt(p).is_err());
        assert!(BigReal::zero(p).ln(p).is_err());
        // pow: negative base with integer exponent is fine
        let m2 = BigReal::from_i64(-2, p);
        let cube = m2.pow(&BigReal::from_i64(3, p), p).unwrap();
        assert_eq!(cube.to_i64_exact(), Some(-8));
        assert!(m2.pow(&BigReal::from_f64(0.5, p), p).is_err());
        // 2^-3
        let h = two.powi(-3, p);
        assert_eq!(h.to_dyadic(), BigRational::new(BigInt::from(1), BigInt::from(8)));
    }

    #[test]
    fn display_uses_positional_for_moderate_exponents() {
        let p = 192;
        let x = BigReal::from_decimal_str("123.456", p).unwrap();
        assert!(x.to_display_string(10).starts_with("123.456"));
        let tiny = BigReal::from_decimal_str("1e-30", p).unwrap();
        assert!(tiny.to_display_string(10).contains('e'));
    }
}
