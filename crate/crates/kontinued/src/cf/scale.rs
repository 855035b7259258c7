//! Scalar multipliers attached to term rules.
//!
//! A continued fraction drawn from an identity family usually has terms like
//! `z²·1` or `(α+1)·n` where `z` or `α` is an algebraic or transcendental
//! constant.  A [`ScaleValue`] captures that scalar exactly when possible:
//! either as a rational, as a rational multiple of a monomial in named
//! constants (`(3/2)·phi²`), or — as a last resort — as a fixed-precision
//! number carried at whatever precision it was produced.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::numerics::{named_constant, BigReal, NumericsError, Prec};

use super::poly::render_rational;

/// A scalar factor, kept exact for as long as the construction allows.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleValue {
    /// An exact rational number.
    Exact(BigRational),
    /// `factor · Π cᵢ^kᵢ` over named constants, e.g. `(1/2)·phi⁻¹·sqrt2³`.
    /// The monomial list is sorted by name and holds no zero powers.
    Symbolic {
        factor: BigRational,
        monomial: Vec<(String, i32)>,
    },
    /// A numeric value fixed at construction precision.  Evaluation at a
    /// higher precision cannot sharpen it, so exact forms are preferred.
    Numeric(BigReal),
}

impl ScaleValue {
    pub fn one() -> Self {
        ScaleValue::Exact(BigRational::from_integer(BigInt::from(1)))
    }

    pub fn zero() -> Self {
        ScaleValue::Exact(BigRational::zero())
    }

    pub fn from_i64(v: i64) -> Self {
        ScaleValue::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        ScaleValue::Exact(q)
    }

    /// `factor · name^power`, normalising empty monomials back to `Exact`.
    pub fn symbolic(factor: BigRational, monomial: Vec<(String, i32)>) -> Self {
        let mut m: Vec<(String, i32)> = monomial.into_iter().filter(|&(_, k)| k != 0).collect();
        m.sort_by(|a, b| a.0.cmp(&b.0));
        if m.is_empty() || factor.is_zero() {
            ScaleValue::Exact(factor)
        } else {
            ScaleValue::Symbolic { factor, monomial: m }
        }
    }

    /// A single named constant with coefficient one.
    pub fn constant(name: &str) -> Self {
        Self::symbolic(
            BigRational::from_integer(BigInt::from(1)),
            vec![(name.to_string(), 1)],
        )
    }

    /// Provably zero (exact-rational zero only; a numeric zero still counts,
    /// since floating zeros arise only from exact cancellation here).
    pub fn is_exact_zero(&self) -> bool {
        match self {
            ScaleValue::Exact(q) => q.is_zero(),
            ScaleValue::Symbolic { .. } => false,
            ScaleValue::Numeric(x) => x.is_zero(),
        }
    }

    /// The exact rational value, if this scale is one.
    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            ScaleValue::Exact(q) => Some(q),
            _ => None,
        }
    }

    /// Resolve to a number at `p` bits.  Exact and symbolic forms are
    /// re-derived at full precision; numeric forms are returned as stored.
    pub fn value(&self, p: Prec) -> Result<BigReal, NumericsError> {
        match self {
            ScaleValue::Exact(q) => Ok(BigReal::from_rational(q, p)),
            ScaleValue::Symbolic { factor, monomial } => {
                let wp = p + 32;
                let mut acc = BigReal::from_rational(factor, wp);
                for (name, k) in monomial {
                    let c = named_constant(name, wp)?;
                    acc = acc.mul(&c.powi(i64::from(*k), wp), wp);
                }
                Ok(acc.with_prec(p))
            }
            ScaleValue::Numeric(x) => Ok(x.with_prec(p)),
        }
    }

    /// Double-precision approximation, for prefilters and display only.
    pub fn to_f64(&self) -> f64 {
        match self {
            ScaleValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            ScaleValue::Symbolic { .. } => self
                .value(96)
                .map(|x| x.to_f64())
                .unwrap_or(f64::NAN),
            ScaleValue::Numeric(x) => x.to_f64(),
        }
    }

    /// Product of two scales, staying exact whenever both operands are
    /// exact or symbolic; mixed numeric operands fall back to numeric at the
    /// larger of the two precisions.
    pub fn mul(&self, o: &Self) -> Self {
        use ScaleValue::*;
        match (self, o) {
            (Exact(a), Exact(b)) => Exact(a * b),
            (Exact(q), Symbolic { factor, monomial })
            | (Symbolic { factor, monomial }, Exact(q)) => {
                Self::symbolic(q * factor, monomial.clone())
            }
            (
                Symbolic { factor: fa, monomial: ma },
                Symbolic { factor: fb, monomial: mb },
            ) => {
                let mut m = ma.clone();
                for (name, k) in mb {
                    match m.iter_mut().find(|(n, _)| n == name) {
                        Some((_, acc)) => *acc += k,
                        None => m.push((name.clone(), *k)),
                    }
                }
                Self::symbolic(fa * fb, m)
            }
            (a, b) => {
                let p = a.numeric_prec().max(b.numeric_prec());
                let va = a.value(p).expect("scale constants are validated at construction");
                let vb = b.value(p).expect("scale constants are validated at construction");
                Numeric(va.mul(&vb, p))
            }
        }
    }

    /// The reciprocal; `None` for zero.  Exact and symbolic scales invert
    /// exactly (monomial powers negate), numeric scales numerically.
    pub fn inverse(&self) -> Option<Self> {
        match self {
            ScaleValue::Exact(q) => {
                if q.is_zero() {
                    None
                } else {
                    Some(ScaleValue::Exact(q.recip()))
                }
            }
            ScaleValue::Symbolic { factor, monomial } => Some(Self::symbolic(
                factor.recip(),
                monomial.iter().map(|(n, k)| (n.clone(), -k)).collect(),
            )),
            ScaleValue::Numeric(x) => {
                if x.is_zero() {
                    None
                } else {
                    let p = x.prec();
                    Some(ScaleValue::Numeric(x.recip(p)))
                }
            }
        }
    }

    fn numeric_prec(&self) -> Prec {
        match self {
            ScaleValue::Numeric(x) => x.prec(),
            _ => crate::numerics::MIN_PREC,
        }
    }

    /// Multiply by an exact rational, preserving exactness.
    pub fn mul_rational(&self, q: &BigRational) -> Self {
        match self {
            ScaleValue::Exact(r) => ScaleValue::Exact(r * q),
            ScaleValue::Symbolic { factor, monomial } => {
                Self::symbolic(factor * q, monomial.clone())
            }
            ScaleValue::Numeric(x) => {
                let p = x.prec();
                ScaleValue::Numeric(x.mul(&BigReal::from_rational(q, p), p))
            }
        }
    }

    /// Render as an expression fragment, parenthesised enough to be re-read
    /// by the literal parser (numeric scales print as decimal literals and
    /// therefore round-trip only approximately).
    pub fn render(&self) -> String {
        match self {
            ScaleValue::Exact(q) => render_signed_rational(q),
            ScaleValue::Symbolic { factor, monomial } => {
                let mut parts = Vec::new();
                let mag = factor.abs();
                if !mag.is_one() {
                    parts.push(render_signed_rational(&mag));
                }
                for (name, k) in monomial {
                    match k {
                        1 => parts.push(name.clone()),
                        _ => parts.push(format!("{name}^{k}")),
                    }
                }
                let body = parts.join("*");
                if factor.is_negative() {
                    format!("-{body}")
                } else {
                    body
                }
            }
            ScaleValue::Numeric(x) => format!("{x}"),
        }
    }

    /// Parse a scalar expression: an optional sign, then factors joined by
    /// `*` and `/`.  A factor is an integer, a fraction `p/q`, an exact
    /// decimal, or a known constant name with an optional integer power
    /// (`3/4`, `2.5`, `phi^2`, `pi/4`, `2*e`, `phi^-1`).  Everything stays
    /// exact: decimals become rationals and names stay symbolic.
    pub fn parse(src: &str) -> Result<Self, String> {
        let s = src.trim();
        if s.is_empty() {
            return Err("empty scalar expression".to_string());
        }
        let (sign, rest) = match s.strip_prefix('-') {
            Some(r) => (-1i64, r.trim_start()),
            None => (1, s),
        };
        let mut acc = ScaleValue::from_i64(sign);
        for part in rest.split('*') {
            // within one part, '/' divides left to right, so the rational
            // `3/4` and the quotient `pi/4` read the same way
            for (i, tok) in part.split('/').enumerate() {
                let tok = tok.trim();
                if tok.is_empty() {
                    return Err(format!("missing factor in {src:?}"));
                }
                let f = parse_factor(tok)?;
                let f = if i > 0 {
                    f.inverse()
                        .ok_or_else(|| format!("division by zero in {src:?}"))?
                } else {
                    f
                };
                acc = acc.mul(&f);
            }
        }
        Ok(acc)
    }
}

fn parse_factor(tok: &str) -> Result<ScaleValue, String> {
    if tok
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_digit() || c == '.')
    {
        return parse_number(tok).map(ScaleValue::from_rational);
    }
    let (name, power) = match tok.split_once('^') {
        Some((n, p)) => {
            let k: i32 = p
                .parse()
                .map_err(|_| format!("bad exponent in {tok:?}"))?;
            (n.trim(), k)
        }
        None => (tok, 1),
    };
    if !crate::numerics::constant_names().contains(&name) {
        return Err(format!(
            "unknown constant {name:?} (expected one of {})",
            crate::numerics::constant_names().join(", ")
        ));
    }
    Ok(ScaleValue::symbolic(
        BigRational::from_integer(BigInt::from(1)),
        vec![(name.to_string(), power)],
    ))
}

fn parse_number(tok: &str) -> Result<BigRational, String> {
    if let Some((int, frac)) = tok.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {tok:?}"));
        }
        let digits = format!("{int}{frac}");
        let num: BigInt = digits.parse().map_err(|_| format!("bad decimal {tok:?}"))?;
        let den = BigInt::from(10).pow(frac.len() as u32);
        return Ok(BigRational::new(num, den));
    }
    let num: BigInt = tok.parse().map_err(|_| format!("bad number {tok:?}"))?;
    Ok(BigRational::from_integer(num))
}

fn render_signed_rational(q: &BigRational) -> String {
    let body = render_rational(&q.abs());
    let body = if q.denom().is_one() {
        body
    } else {
        format!("({body})")
    };
    if q.is_negative() {
        format!("-{body}")
    } else {
        body
    }
}
