//! The nine conjectured identities and their verification harness.
//!
//! Each identity pairs a polynomial-rule continued fraction with a closed
//! form.  Writing `K(b(n)/a(n))` for `b₁/(a₁ + b₂/(a₂ + ⋯))`:
//!
//! 1. `K((αn+1)(2αξ−2αn−1) / (3αn+α+2))
//!      = −1−α + Γ(ξ+1/2)Γ(1/(2α)) / (Γ(ξ)Γ((α+1)/(2α)))`
//! 2. `K(−(2n+α)(4n−4ξ+2α−1) / (6n+2α+2)) = −2−α
//!      + 2√2·Γ(1/4)Γ(3/4)Γ(1+α/4)Γ(3/4−α/4+ξ)
//!        / (π·Γ(1/2+α/4)Γ(1/4−α/4+ξ))`
//! 3. with `g(k,x) = K((n+1)(k−n−k/x)/x ÷ (n+1)(1+1/x))` and `ξ' = ξ/(ξ−1)`:
//!    `2 + g(α,ξ) + g(α,ξ')
//!      = α(ξ−1)^(α/ξ−1)·(ξ/(ξ−1))^(α−2)·B(α/ξ, α−α/ξ)`;
//!    when `α = ξ'` the first fraction vanishes identically (`b₁ = 0`)
//! 4. `φ^φ = 2 + K((n+1)(1−n/φ)/φ ÷ (n+1)(2−1/φ))`
//! 5. `φ^(2/φ) = 2 + K((n+1)(1−(n+1)/φ) ÷ (n+1)φ)`
//! 6. `(x/(x−1))^(x−1) = 2 + K((n+1)(x−n−1)/x ÷ (n+1)(x+1)/x)`
//! 7. `((x−1)/(2x−1))·((x/(x−1))^(2x−1) − 1)
//!      = 2 + K((n+1)(2x−n−2)/x ÷ (n+1)(x+1)/x)`
//! 8. `tanh z = K(1+((n−1)w)² ÷ (2n−1)w)` with `w = π/(4z)`
//! 9. `Σ_{n≥1} Π_{k=1}^n (αk+1)^(−1) = K((αn)^(−1) / 1)`, shipped in the
//!    depth-preserving equivalent form `b₁ = 1/α, b(n) = (n−1)/α, a(n) = n`
//!    (scale every level by `cₙ = n`; every convergent is unchanged)
//!
//! Integer parameters make some fractions terminate: equation 6 at
//! `n = x−1` and equation 7 at `n = 2x−2` hit an exactly-zero numerator
//! and the identity closes over rationals (`x = 3` gives `9/4` and
//! `211/80` respectively).
//!
//! [`verify`] certifies one instance: it converges the fraction with the
//! doubling certificate, evaluates the closed form with guard bits, and
//! compares.  [`first_crossing`] measures how many terms a fraction needs
//! to reach a target, which backs the convergence-rate comparisons against
//! the classical tanh fraction and the Euler transform of the series in
//! equation 9.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::cf::{
    converge, CfError, CfStatus, ConvergenceReport, Gcf, PolyQ, ScaleValue, TermRule,
};
use crate::numerics::{beta, erf, erfi, gamma, named_constant, BigReal, NumericsError, Prec};

// ---------------------------------------------------------------------------
// identity catalogue
// ---------------------------------------------------------------------------

/// The nine conjectured identities, in equation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityId {
    /// Equation 1: gamma quotient with parameters `α, ξ`.
    GammaQuotient,
    /// Equation 2: the `Γ(1/4)Γ(3/4)` family with parameters `α, ξ`.
    Lemniscate,
    /// Equation 3: the two-fraction functional relation in `α, ξ`.
    FunctionalRelation,
    /// Equation 4: `φ^φ`.
    PhiSelfPower,
    /// Equation 5: `φ^(2/φ)`.
    PhiTwoOverPhi,
    /// Equation 6: `(x/(x−1))^(x−1)`.
    SelfPower,
    /// Equation 7: the doubled exponent variant of equation 6.
    DoubleSelfPower,
    /// Equation 8: `tanh z` with `w = π/(4z)`.
    TanhCf,
    /// Equation 9: the sum of reciprocal rising products.
    SumOfProducts,
}

impl IdentityId {
    pub const ALL: [IdentityId; 9] = [
        IdentityId::GammaQuotient,
        IdentityId::Lemniscate,
        IdentityId::FunctionalRelation,
        IdentityId::PhiSelfPower,
        IdentityId::PhiTwoOverPhi,
        IdentityId::SelfPower,
        IdentityId::DoubleSelfPower,
        IdentityId::TanhCf,
        IdentityId::SumOfProducts,
    ];

    pub fn equation_number(self) -> u8 {
        match self {
            IdentityId::GammaQuotient => 1,
            IdentityId::Lemniscate => 2,
            IdentityId::FunctionalRelation => 3,
            IdentityId::PhiSelfPower => 4,
            IdentityId::PhiTwoOverPhi => 5,
            IdentityId::SelfPower => 6,
            IdentityId::DoubleSelfPower => 7,
            IdentityId::TanhCf => 8,
            IdentityId::SumOfProducts => 9,
        }
    }

    /// Short human-readable handle.
    pub fn title(self) -> &'static str {
        match self {
            IdentityId::GammaQuotient => "gamma quotient",
            IdentityId::Lemniscate => "gamma quarter-integer family",
            IdentityId::FunctionalRelation => "beta functional relation",
            IdentityId::PhiSelfPower => "phi to the phi",
            IdentityId::PhiTwoOverPhi => "phi to the 2/phi",
            IdentityId::SelfPower => "rational self-power",
            IdentityId::DoubleSelfPower => "doubled self-power",
            IdentityId::TanhCf => "hyperbolic tangent",
            IdentityId::SumOfProducts => "sum of reciprocal products",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "eq{}", self.equation_number())
    }
}

impl FromStr for IdentityId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IdentityId::ALL
            .iter()
            .copied()
            .find(|id| format!("eq{}", id.equation_number()) == s)
            .ok_or_else(|| format!("unknown identity {s:?} (expected eq1..eq9)"))
    }
}

/// Parameter slots; each identity reads the slots it documents and ignores
/// the rest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub alpha: Option<ScaleValue>,
    pub xi: Option<ScaleValue>,
    pub x: Option<ScaleValue>,
    pub z: Option<ScaleValue>,
}

impl Params {
    pub fn none() -> Self {
        Params::default()
    }

    pub fn alpha_xi(alpha: ScaleValue, xi: ScaleValue) -> Self {
        Params {
            alpha: Some(alpha),
            xi: Some(xi),
            ..Params::default()
        }
    }

    pub fn with_alpha(alpha: ScaleValue) -> Self {
        Params {
            alpha: Some(alpha),
            ..Params::default()
        }
    }

    pub fn with_x(x: ScaleValue) -> Self {
        Params {
            x: Some(x),
            ..Params::default()
        }
    }

    pub fn with_z(z: ScaleValue) -> Self {
        Params {
            z: Some(z),
            ..Params::default()
        }
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (name, v) in [
            ("alpha", &self.alpha),
            ("xi", &self.xi),
            ("x", &self.x),
            ("z", &self.z),
        ] {
            if let Some(v) = v {
                parts.push(format!("{name}={}", v.render()));
            }
        }
        parts.join(" ")
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("{id} requires parameter {name}")]
    MissingParam { id: IdentityId, name: &'static str },
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn req<'a>(
    slot: &'a Option<ScaleValue>,
    id: IdentityId,
    name: &'static str,
) -> Result<&'a ScaleValue, IdentityError> {
    slot.as_ref()
        .ok_or(IdentityError::MissingParam { id, name })
}

// ---------------------------------------------------------------------------
// rule-building helpers
// ---------------------------------------------------------------------------

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn sv(v: i64) -> ScaleValue {
    ScaleValue::from_i64(v)
}

fn zero_rule() -> TermRule {
    TermRule::zero()
}

/// `c₁·n + c₀` as a rule.
fn linear(c1: ScaleValue, c0: ScaleValue) -> TermRule {
    TermRule::sum(vec![
        (c1, PolyQ::var()),
        (c0, PolyQ::constant(BigRational::from_integer(1.into()))),
    ])
}

fn np1() -> TermRule {
    TermRule::from_i64_coeffs(&[1, 1])
}

fn invert(v: &ScaleValue, what: &str) -> Result<ScaleValue, IdentityError> {
    v.inverse()
        .ok_or_else(|| IdentityError::Domain(format!("{what} must be nonzero")))
}

// ---------------------------------------------------------------------------
// fraction builders
// ---------------------------------------------------------------------------

/// The continued fraction on the fraction side of `id`.
///
/// For the functional relation (equation 3) this is the first of its two
/// fractions, `g(α, ξ)`; [`verify`] assembles the full left side from both.
pub fn build_cf(id: IdentityId, params: &Params) -> Result<Gcf, IdentityError> {
    match id {
        IdentityId::GammaQuotient => {
            let alpha = req(&params.alpha, id, "alpha")?;
            let xi = req(&params.xi, id, "xi")?;
            gamma_quotient_cf(alpha, xi)
        }
        IdentityId::Lemniscate => {
            let alpha = req(&params.alpha, id, "alpha")?;
            let xi = req(&params.xi, id, "xi")?;
            lemniscate_cf(alpha, xi)
        }
        IdentityId::FunctionalRelation => {
            let alpha = req(&params.alpha, id, "alpha")?;
            let xi = req(&params.xi, id, "xi")?;
            g_cf(alpha, xi)
        }
        IdentityId::PhiSelfPower => phi_self_power_cf(),
        IdentityId::PhiTwoOverPhi => phi_two_over_phi_cf(),
        IdentityId::SelfPower => self_power_cf(req(&params.x, id, "x")?),
        IdentityId::DoubleSelfPower => double_self_power_cf(req(&params.x, id, "x")?),
        IdentityId::TanhCf => tanh_cf(req(&params.z, id, "z")?),
        IdentityId::SumOfProducts => sum_of_products_cf(req(&params.alpha, id, "alpha")?),
    }
}

fn gamma_quotient_cf(alpha: &ScaleValue, xi: &ScaleValue) -> Result<Gcf, IdentityError> {
    if alpha.is_exact_zero() {
        return Err(IdentityError::Domain("alpha must be nonzero".into()));
    }
    // b(n) = (αn+1)·(−2αn + 2αξ − 1)
    let t1 = linear(alpha.clone(), sv(1));
    let t2 = TermRule::sum(vec![
        (alpha.mul_rational(&rat(-2, 1)), PolyQ::var()),
        (
            alpha.mul(xi).mul_rational(&rat(2, 1)),
            PolyQ::constant(rat(1, 1)),
        ),
        (sv(-1), PolyQ::constant(rat(1, 1))),
    ]);
    let b = t1.mul_rule(&t2);
    // a(n) = 3αn + (α + 2)
    let a = TermRule::sum(vec![
        (alpha.mul_rational(&rat(3, 1)), PolyQ::var()),
        (alpha.clone(), PolyQ::constant(rat(1, 1))),
        (sv(2), PolyQ::constant(rat(1, 1))),
    ]);
    Ok(Gcf::new(zero_rule(), b, a))
}

fn lemniscate_cf(alpha: &ScaleValue, xi: &ScaleValue) -> Result<Gcf, IdentityError> {
    // b(n) = (2n+α)·(−4n + 4ξ − 2α + 1)
    let t1 = linear(sv(2), alpha.clone());
    let t2 = TermRule::sum(vec![
        (sv(-4), PolyQ::var()),
        (xi.mul_rational(&rat(4, 1)), PolyQ::constant(rat(1, 1))),
        (alpha.mul_rational(&rat(-2, 1)), PolyQ::constant(rat(1, 1))),
        (sv(1), PolyQ::constant(rat(1, 1))),
    ]);
    let b = t1.mul_rule(&t2);
    // a(n) = 6n + (2α + 2)
    let a = TermRule::sum(vec![
        (sv(6), PolyQ::var()),
        (alpha.mul_rational(&rat(2, 1)), PolyQ::constant(rat(1, 1))),
        (sv(2), PolyQ::constant(rat(1, 1))),
    ]);
    Ok(Gcf::new(zero_rule(), b, a))
}

/// The auxiliary family of equation 3:
/// `g(k, x) = K((n+1)(k−n−k/x)/x ÷ (n+1)(1+1/x))`.
pub fn g_cf(k: &ScaleValue, x: &ScaleValue) -> Result<Gcf, IdentityError> {
    let s = invert(x, "x")?;
    // k − n − k/x = −n + (k − k·s)
    let t2 = TermRule::sum(vec![
        (sv(-1), PolyQ::var()),
        (k.clone(), PolyQ::constant(rat(1, 1))),
        (k.mul(&s).mul_rational(&rat(-1, 1)), PolyQ::constant(rat(1, 1))),
    ]);
    let b = np1().mul_rule(&t2).scale_by(&s);
    let a = np1().mul_rule(&TermRule::sum(vec![
        (sv(1), PolyQ::constant(rat(1, 1))),
        (s.clone(), PolyQ::constant(rat(1, 1))),
    ]));
    Ok(Gcf::new(zero_rule(), b, a))
}

fn phi() -> ScaleValue {
    ScaleValue::constant("phi")
}

fn phi_pow(k: i32) -> ScaleValue {
    ScaleValue::symbolic(rat(1, 1), vec![("phi".to_string(), k)])
}

fn phi_self_power_cf() -> Result<Gcf, IdentityError> {
    let inv = phi_pow(-1);
    // b(n) = (n+1)·(1 − n/φ)·(1/φ)
    let b = np1()
        .mul_rule(&linear(inv.mul_rational(&rat(-1, 1)), sv(1)))
        .scale_by(&inv);
    // a(n) = (n+1)·(2 − 1/φ)
    let a = np1().mul_rule(&TermRule::sum(vec![
        (sv(2), PolyQ::constant(rat(1, 1))),
        (inv.mul_rational(&rat(-1, 1)), PolyQ::constant(rat(1, 1))),
    ]));
    Ok(Gcf::new(TermRule::from_i64_coeffs(&[2]), b, a))
}

fn phi_two_over_phi_cf() -> Result<Gcf, IdentityError> {
    let inv = phi_pow(-1);
    // b(n) = (n+1)·(1 − (n+1)/φ) = (n+1)·((1 − 1/φ) − n/φ)
    let b = np1().mul_rule(&TermRule::sum(vec![
        (inv.mul_rational(&rat(-1, 1)), PolyQ::var()),
        (sv(1), PolyQ::constant(rat(1, 1))),
        (inv.mul_rational(&rat(-1, 1)), PolyQ::constant(rat(1, 1))),
    ]));
    // a(n) = (n+1)·φ
    let a = np1().scale_by(&phi());
    Ok(Gcf::new(TermRule::from_i64_coeffs(&[2]), b, a))
}

fn self_power_cf(x: &ScaleValue) -> Result<Gcf, IdentityError> {
    let s = invert(x, "x")?;
    // b(n) = (n+1)·(x − n − 1)·(1/x)
    let t2 = TermRule::sum(vec![
        (sv(-1), PolyQ::var()),
        (x.clone(), PolyQ::constant(rat(1, 1))),
        (sv(-1), PolyQ::constant(rat(1, 1))),
    ]);
    let b = np1().mul_rule(&t2).scale_by(&s);
    let a = shared_self_power_denominator(&s);
    Ok(Gcf::new(TermRule::from_i64_coeffs(&[2]), b, a))
}

fn double_self_power_cf(x: &ScaleValue) -> Result<Gcf, IdentityError> {
    let s = invert(x, "x")?;
    // b(n) = (n+1)·(2x − n − 2)·(1/x)
    let t2 = TermRule::sum(vec![
        (sv(-1), PolyQ::var()),
        (x.mul_rational(&rat(2, 1)), PolyQ::constant(rat(1, 1))),
        (sv(-2), PolyQ::constant(rat(1, 1))),
    ]);
    let b = np1().mul_rule(&t2).scale_by(&s);
    let a = shared_self_power_denominator(&s);
    Ok(Gcf::new(TermRule::from_i64_coeffs(&[2]), b, a))
}

/// `a(n) = (n+1)(x+1)/x`, shared by equations 6 and 7.
fn shared_self_power_denominator(s: &ScaleValue) -> TermRule {
    np1().mul_rule(&TermRule::sum(vec![
        (sv(1), PolyQ::constant(rat(1, 1))),
        (s.clone(), PolyQ::constant(rat(1, 1))),
    ]))
}

fn tanh_cf(z: &ScaleValue) -> Result<Gcf, IdentityError> {
    let w = ScaleValue::constant("pi")
        .mul_rational(&rat(1, 4))
        .mul(&invert(z, "z")?);
    let w2 = w.mul(&w);
    // b(n) = 1 + ((n−1)w)²
    let b = TermRule::sum(vec![
        (sv(1), PolyQ::constant(rat(1, 1))),
        (w2, PolyQ::from_coeffs(vec![rat(1, 1), rat(-2, 1), rat(1, 1)])),
    ]);
    // a(n) = (2n−1)·w
    let a = TermRule::scaled(w, PolyQ::from_coeffs(vec![rat(-1, 1), rat(2, 1)]));
    Ok(Gcf::new(zero_rule(), b, a))
}

fn sum_of_products_cf(alpha: &ScaleValue) -> Result<Gcf, IdentityError> {
    let s = invert(alpha, "alpha")?;
    // depth-preserving equivalent of K((αn)^(−1)/1) under cₙ = n
    let b = TermRule::scaled(s.clone(), PolyQ::from_coeffs(vec![rat(-1, 1), rat(1, 1)]));
    let a = TermRule::from_i64_coeffs(&[0, 1]);
    Ok(Gcf::new(zero_rule(), b, a).with_first_numerator(TermRule::constant(s)))
}

// ---------------------------------------------------------------------------
// reference fractions for convergence comparisons
// ---------------------------------------------------------------------------

/// The classical fraction `tanh z = z/(1 + z²/(3 + z²/(5 + ⋯)))`.
pub fn classical_tanh_cf(z: &ScaleValue) -> Result<Gcf, IdentityError> {
    if z.is_exact_zero() {
        return Err(IdentityError::Domain("z must be nonzero".into()));
    }
    let b = TermRule::constant(z.mul(z));
    let a = TermRule::from_i64_coeffs(&[-1, 2]);
    Ok(Gcf::new(zero_rule(), b, a).with_first_numerator(TermRule::constant(z.clone())))
}

/// The Euler transform of the series in equation 9, with denominators
/// cleared by `cₙ = αn+1`:
/// `b₁ = 1, a₁ = α+1, b(n) = −(α(n−1)+1), a(n) = αn+2`.
pub fn euler_series_cf(alpha: &ScaleValue) -> Result<Gcf, IdentityError> {
    if alpha.is_exact_zero() {
        return Err(IdentityError::Domain("alpha must be nonzero".into()));
    }
    let b = TermRule::sum(vec![
        (alpha.mul_rational(&rat(-1, 1)), PolyQ::var()),
        (alpha.clone(), PolyQ::constant(rat(1, 1))),
        (sv(-1), PolyQ::constant(rat(1, 1))),
    ]);
    let a = TermRule::sum(vec![
        (alpha.clone(), PolyQ::var()),
        (sv(2), PolyQ::constant(rat(1, 1))),
    ]);
    let a1 = TermRule::sum(vec![
        (alpha.clone(), PolyQ::constant(rat(1, 1))),
        (sv(1), PolyQ::constant(rat(1, 1))),
    ]);
    Ok(Gcf::new(zero_rule(), b, a)
        .with_first_numerator(TermRule::from_i64_coeffs(&[1]))
        .with_first_denominator(a1))
}

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

/// The Möbius step `ξ ↦ ξ/(ξ−1)` that pairs the two fractions of
/// equation 3.  Exact over the rationals; over the golden-ratio monomials
/// it uses `φ/(φ−1) = φ²` and `φ²/(φ²−1) = φ`; anything else falls back to
/// a numeric value with guard bits.
pub fn mobius_xi(xi: &ScaleValue, p: Prec) -> Result<ScaleValue, IdentityError> {
    if let Some(q) = xi.exact() {
        let one = BigRational::from_integer(1.into());
        if q == &one {
            return Err(IdentityError::Domain("xi must not equal 1".into()));
        }
        return Ok(ScaleValue::from_rational(q / (q - one)));
    }
    if let ScaleValue::Symbolic { factor, monomial } = xi {
        if factor == &rat(1, 1) && monomial.len() == 1 && monomial[0].0 == "phi" {
            match monomial[0].1 {
                1 => return Ok(phi_pow(2)),
                2 => return Ok(phi_pow(1)),
                _ => {}
            }
        }
    }
    let wp = p + 32;
    let xv = xi.value(wp)?;
    let den = xv.sub(&BigReal::one(wp), wp);
    if den.is_zero() {
        return Err(IdentityError::Domain("xi must not equal 1".into()));
    }
    Ok(ScaleValue::Numeric(xv.div(&den, wp)))
}

/// The closed-form side of `id` at roughly `p` bits.
pub fn rhs_value(id: IdentityId, params: &Params, p: Prec) -> Result<BigReal, IdentityError> {
    let wp = p + 32;
    match id {
        IdentityId::GammaQuotient => {
            let alpha = req(&params.alpha, id, "alpha")?;
            let xi = req(&params.xi, id, "xi")?;
            let av = alpha.value(wp)?;
            let xv = xi.value(wp)?;
            let half = BigReal::from_rational(&rat(1, 2), wp);
            let one = BigReal::one(wp);
            let inv2a = invert(alpha, "alpha")?
                .mul_rational(&rat(1, 2))
                .value(wp)?;
            let g1 = gamma(&xv.add(&half, wp), wp)?;
            let g2 = gamma(&inv2a, wp)?;
            let g3 = gamma(&xv, wp)?;
            let g4 = gamma(&av.add(&one, wp).div(&av, wp).mul(&half, wp), wp)?;
            let quot = g1.mul(&g2, wp).div(&g3.mul(&g4, wp), wp);
            Ok(quot.sub(&one, wp).sub(&av, wp))
        }
        IdentityId::Lemniscate => {
            let alpha = req(&params.alpha, id, "alpha")?;
            let xi = req(&params.xi, id, "xi")?;
            let av = alpha.value(wp)?;
            let xv = xi.value(wp)?;
            let two = BigReal::from_i64(2, wp);
            let q = |n: i64, d: i64| BigReal::from_rational(&rat(n, d), wp);
            let a4 = av.mul(&q(1, 4), wp);
            let num = two
                .mul(&named_constant("sqrt2", wp)?, wp)
                .mul(&gamma(&q(1, 4), wp)?, wp)
                .mul(&gamma(&q(3, 4), wp)?, wp)
                .mul(&gamma(&a4.add(&BigReal::one(wp), wp), wp)?, wp)
                .mul(&gamma(&q(3, 4).sub(&a4, wp).add(&xv, wp), wp)?, wp);
            let den = named_constant("pi", wp)?
                .mul(&gamma(&q(1, 2).add(&a4, wp), wp)?, wp)
                .mul(&gamma(&q(1, 4).sub(&a4, wp).add(&xv, wp), wp)?, wp);
            Ok(num.div(&den, wp).sub(&two, wp).sub(&av, wp))
        }
        IdentityId::FunctionalRelation => {
            let alpha = req(&params.alpha, id, "alpha")?;
            let xi = req(&params.xi, id, "xi")?;
            let av = alpha.value(wp)?;
            let xv = xi.value(wp)?;
            let one = BigReal::one(wp);
            let xm1 = xv.sub(&one, wp);
            if !xm1.is_positive() {
                return Err(IdentityError::Domain("xi must exceed 1".into()));
            }
            let a_over_x = av.div(&xv, wp);
            let t1 = xm1.pow(&a_over_x.sub(&one, wp), wp)?;
            let t2 = xv
                .div(&xm1, wp)
                .pow(&av.sub(&BigReal::from_i64(2, wp), wp), wp)?;
            let bt = beta(&a_over_x, &av.sub(&a_over_x, wp), wp)?;
            Ok(av.mul(&t1, wp).mul(&t2, wp).mul(&bt, wp))
        }
        IdentityId::PhiSelfPower => {
            let pv = named_constant("phi", wp)?;
            Ok(pv.pow(&pv, wp)?)
        }
        IdentityId::PhiTwoOverPhi => {
            let pv = named_constant("phi", wp)?;
            let e = BigReal::from_i64(2, wp).div(&pv, wp);
            Ok(pv.pow(&e, wp)?)
        }
        IdentityId::SelfPower => {
            let x = req(&params.x, id, "x")?;
            let xv = x.value(wp)?;
            let xm1 = xv.sub(&BigReal::one(wp), wp);
            if xm1.is_zero() || xv.is_zero() {
                return Err(IdentityError::Domain("x must avoid 0 and 1".into()));
            }
            Ok(xv.div(&xm1, wp).pow(&xm1, wp)?)
        }
        IdentityId::DoubleSelfPower => {
            let x = req(&params.x, id, "x")?;
            let xv = x.value(wp)?;
            let one = BigReal::one(wp);
            let xm1 = xv.sub(&one, wp);
            let two_xm1 = xv.mul(&BigReal::from_i64(2, wp), wp).sub(&one, wp);
            if xm1.is_zero() || xv.is_zero() || two_xm1.is_zero() {
                return Err(IdentityError::Domain("x must avoid 0, 1/2 and 1".into()));
            }
            let power = xv.div(&xm1, wp).pow(&two_xm1, wp)?;
            Ok(xm1.div(&two_xm1, wp).mul(&power.sub(&one, wp), wp))
        }
        IdentityId::TanhCf => {
            let z = req(&params.z, id, "z")?;
            let zv = z.value(wp)?;
            if zv.is_zero() {
                return Err(IdentityError::Domain("z must be nonzero".into()));
            }
            Ok(zv.tanh(wp))
        }
        IdentityId::SumOfProducts => {
            let alpha = req(&params.alpha, id, "alpha")?;
            sum_of_products_rhs(alpha, p)
        }
    }
}

fn sum_of_products_rhs(alpha: &ScaleValue, p: Prec) -> Result<BigReal, IdentityError> {
    let wp = p + 32;
    if let Some(q) = alpha.exact() {
        let one = BigReal::one(wp);
        let e = BigReal::one(wp).exp(wp);
        if q == &rat(-2, 1) {
            // −√(π/(2e))·erfi(1/√2)
            let pi = named_constant("pi", wp)?;
            let arg = BigReal::from_i64(2, wp).recip(wp).sqrt(wp)?;
            let root = pi.div(&e.mul(&BigReal::from_i64(2, wp), wp), wp).sqrt(wp)?;
            return Ok(root.mul(&erfi(&arg, wp), wp).neg());
        }
        if q == &rat(1, 2) {
            // (e² − 5)/2
            let e2 = e.mul(&e, wp);
            return Ok(e2.sub(&BigReal::from_i64(5, wp), wp)
                .div(&BigReal::from_i64(2, wp), wp));
        }
        if q == &rat(1, 1) {
            return Ok(e.sub(&BigReal::from_i64(2, wp), wp));
        }
        if q == &rat(2, 1) {
            // −1 + √(eπ/2)·erf(1/√2)
            let pi = named_constant("pi", wp)?;
            let arg = BigReal::from_i64(2, wp).recip(wp).sqrt(wp)?;
            let root = e.mul(&pi, wp).div(&BigReal::from_i64(2, wp), wp).sqrt(wp)?;
            return Ok(root.mul(&erf(&arg, wp), wp).sub(&one, wp));
        }
    }
    sum_of_products_series(alpha, p)
}

/// Direct summation of `Σ_{n≥1} Π_{k=1}^n (αk+1)^(−1)`, the series side of
/// equation 9.  Independent of the continued fraction and of the special
/// functions in the closed forms, so it doubles as an oracle for both.
pub fn sum_of_products_series(alpha: &ScaleValue, p: Prec) -> Result<BigReal, IdentityError> {
    let wp = p + 64;
    let av = alpha.value(wp)?;
    if av.is_zero() {
        return Err(IdentityError::Domain("alpha must be nonzero".into()));
    }
    let one = BigReal::one(wp);
    let mut term = BigReal::one(wp);
    let mut acc = BigReal::zero(wp);
    let tail_exp = -(p as i64) - 16;
    for n in 1..100_000i64 {
        let factor = av.mul(&BigReal::from_i64(n, wp), wp).add(&one, wp);
        if factor.is_zero() {
            return Err(IdentityError::Domain(format!(
                "series pole: alpha·{n} + 1 vanishes"
            )));
        }
        term = term.div(&factor, wp);
        acc = acc.add(&term, wp);
        // once |α·n+1| ≥ 2 the tail is bounded by the last term
        if term.div(&acc.norm_scale(wp), wp).le_pow2(tail_exp) && n > 2 {
            return Ok(acc);
        }
    }
    Err(IdentityError::Domain(
        "series did not reach the target precision".into(),
    ))
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

/// Slack between the convergence certificate and the pass threshold.
pub const VERIFY_GUARD_BITS: i64 = 64;

/// Outcome of verifying one identity instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Fraction settled and the residual is below the threshold.
    Pass,
    /// Fraction settled but the sides disagree.
    Fail,
    /// The fraction did not settle, so the identity was not decided.
    NoConverge,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NoConverge => "no-converge",
        })
    }
}

/// Full record of one verification: both sides, the residual, the verdict.
#[derive(Debug, Clone)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub params: Params,
    pub prec: Prec,
    /// Convergence report of the fraction side (for equation 3, of the
    /// assembled two-fraction left side).
    pub lhs: ConvergenceReport,
    pub rhs: BigReal,
    pub residual: BigReal,
    pub verdict: Verdict,
}

impl fmt::Display for IdentityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.params.render();
        let sep = if p.is_empty() { "" } else { " " };
        write!(
            f,
            "{}{sep}{p} prec={} depth={} status={} residual={} verdict={}",
            self.id,
            self.prec,
            self.lhs.depth_used,
            self.lhs.status,
            self.residual.to_decimal_string(3),
            self.verdict
        )
    }
}

/// Certify one instance of `id` at precision `prec`.
///
/// The fraction is converged with the doubling certificate at `prec`, the
/// closed form is evaluated with [`VERIFY_GUARD_BITS`] extra bits, and the
/// instance passes when the residual is at most
/// `2^(VERIFY_GUARD_BITS − prec) · max(1, |rhs|)`.  A fraction that fails
/// to settle yields [`Verdict::NoConverge`] rather than an error.
pub fn verify(id: IdentityId, params: &Params, prec: Prec) -> Result<IdentityCase, IdentityError> {
    let lhs = match id {
        IdentityId::FunctionalRelation => functional_relation_lhs(params, prec)?,
        _ => {
            let cf = build_cf(id, params)?;
            converge(&cf, prec)?
        }
    };
    let wp = prec + VERIFY_GUARD_BITS as Prec;
    let rhs = rhs_value(id, params, wp)?;
    let residual = lhs.value.sub(&rhs, wp).abs();
    let verdict = if !lhs.is_settled() {
        Verdict::NoConverge
    } else if residual
        .div(&rhs.norm_scale(wp), wp)
        .le_pow2(VERIFY_GUARD_BITS - prec as i64)
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(IdentityCase {
        id,
        params: params.clone(),
        prec,
        lhs,
        rhs,
        residual,
        verdict,
    })
}

/// Assemble `2 + g(α, ξ) + g(α, ξ/(ξ−1))` as one report: the combined
/// value, the larger depth, the sum of the error estimates, and the least
/// settled status.
fn functional_relation_lhs(
    params: &Params,
    prec: Prec,
) -> Result<ConvergenceReport, IdentityError> {
    let alpha = req(&params.alpha, IdentityId::FunctionalRelation, "alpha")?;
    let xi = req(&params.xi, IdentityId::FunctionalRelation, "xi")?;
    let xi2 = mobius_xi(xi, prec + 64)?;
    let r1 = converge(&g_cf(alpha, xi)?, prec)?;
    let r2 = converge(&g_cf(alpha, &xi2)?, prec)?;
    let wp = prec + VERIFY_GUARD_BITS as Prec;
    let value = BigReal::from_i64(2, wp)
        .add(&r1.value, wp)
        .add(&r2.value, wp);
    let status = combine_status(r1.status, r2.status);
    Ok(ConvergenceReport {
        value,
        depth_used: r1.depth_used.max(r2.depth_used),
        status,
        error_estimate: r1.error_estimate.add(&r2.error_estimate, wp),
    })
}

fn combine_status(a: CfStatus, b: CfStatus) -> CfStatus {
    match (a.is_settled(), b.is_settled()) {
        (false, _) => a,
        (true, false) => b,
        (true, true) => {
            if a == CfStatus::FiniteTermination && b == CfStatus::FiniteTermination {
                CfStatus::FiniteTermination
            } else {
                CfStatus::Converged
            }
        }
    }
}

// ---------------------------------------------------------------------------
// convergence-rate measurement
// ---------------------------------------------------------------------------

/// First depth at which the fraction's convergent is within
/// `2^(VERIFY_GUARD_BITS − prec) · max(1, |target|)` of `target`, or `None`
/// within `max_depth`.  Convergents are produced incrementally with the
/// Lentz recurrence at `prec + 64` working bits, so measuring depth `N`
/// costs `O(N)` rather than one backward pass per candidate depth.
pub fn first_crossing(
    cf: &Gcf,
    target: &BigReal,
    prec: Prec,
    max_depth: u64,
) -> Result<Option<u64>, IdentityError> {
    let wp = prec + 64;
    let tol_exp = VERIFY_GUARD_BITS - prec as i64;
    let norm = target.norm_scale(wp);
    let close = |f: &BigReal| {
        f.sub(target, wp)
            .abs()
            .div(&norm, wp)
            .le_pow2(tol_exp)
    };

    let b_scales = cf.b_rule().materialize(wp)?;
    let a_scales = cf.a_rule().materialize(wp)?;
    let b1_scales = cf.effective_b1().materialize(wp)?;
    let a1_scales = cf.effective_a1().materialize(wp)?;

    let tiny = BigReal::pow2(-2 * wp as i64, wp);
    let a0 = cf.a0().eval(0, wp)?;
    let mut f = if a0.is_zero() { tiny.clone() } else { a0 };
    let mut c = f.clone();
    let mut d = BigReal::zero(wp);
    for n in 1..=max_depth {
        let (bn, an) = if n == 1 {
            (
                cf.effective_b1().eval_with(1, &b1_scales, wp),
                cf.effective_a1().eval_with(1, &a1_scales, wp),
            )
        } else {
            (
                cf.b_rule().eval_with(n as i64, &b_scales, wp),
                cf.a_rule().eval_with(n as i64, &a_scales, wp),
            )
        };
        if bn.is_zero() {
            // terminated: the value is frozen at the previous convergent
            return Ok(close(&f).then(|| n.saturating_sub(1)));
        }
        d = an.add(&bn.mul(&d, wp), wp);
        if d.is_zero() {
            d = tiny.clone();
        }
        c = an.add(&bn.div(&c, wp), wp);
        if c.is_zero() {
            c = tiny.clone();
        }
        d = d.recip(wp);
        f = f.mul(&c.mul(&d, wp), wp);
        if !f.is_finite() {
            return Ok(None);
        }
        if close(&f) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// standard suite
// ---------------------------------------------------------------------------

/// One entry of the standard verification grid.
#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub id: IdentityId,
    pub params: Params,
    pub prec: Prec,
}

fn e_const() -> ScaleValue {
    ScaleValue::constant("e")
}

fn pi_const() -> ScaleValue {
    ScaleValue::constant("pi")
}

fn svr(n: i64, d: i64) -> ScaleValue {
    ScaleValue::from_rational(rat(n, d))
}

/// The standard parameter grid: every identity at the parameter values the
/// project certifies by default.
pub fn default_suite() -> Vec<SuiteCase> {
    let mut suite = Vec::new();
    // equation 1 over a rational/transcendental grid
    for alpha in [svr(1, 2), svr(1, 1), svr(2, 1), svr(3, 1)] {
        for xi in [
            svr(3, 4),
            svr(1, 1),
            svr(3, 2),
            svr(2, 1),
            e_const(),
            pi_const(),
        ] {
            suite.push(SuiteCase {
                id: IdentityId::GammaQuotient,
                params: Params::alpha_xi(alpha.clone(), xi),
                prec: 256,
            });
        }
    }
    // equation 2, including α = 0
    for alpha in [svr(0, 1), svr(1, 1), svr(2, 1), svr(3, 1)] {
        for xi in [svr(1, 1), svr(3, 2), svr(2, 1), pi_const()] {
            suite.push(SuiteCase {
                id: IdentityId::Lemniscate,
                params: Params::alpha_xi(alpha.clone(), xi),
                prec: 256,
            });
        }
    }
    // equation 3: generic points and the vanishing-fraction cases α = ξ/(ξ−1)
    for (alpha, xi) in [
        (svr(3, 1), svr(2, 1)),
        (svr(2, 1), phi_pow(2)),
        (svr(5, 2), svr(3, 1)),
        (phi_pow(2), phi_pow(1)),
        (phi_pow(1), phi_pow(2)),
        (svr(3, 1), svr(3, 2)),
        (svr(4, 1), svr(4, 3)),
    ] {
        suite.push(SuiteCase {
            id: IdentityId::FunctionalRelation,
            params: Params::alpha_xi(alpha, xi),
            prec: 256,
        });
    }
    suite.push(SuiteCase {
        id: IdentityId::PhiSelfPower,
        params: Params::none(),
        prec: 256,
    });
    suite.push(SuiteCase {
        id: IdentityId::PhiTwoOverPhi,
        params: Params::none(),
        prec: 256,
    });
    // equation 6: integer points terminate finitely; x = 3/2 gives √3
    for x in [
        svr(2, 1),
        svr(3, 1),
        svr(5, 1),
        svr(3, 2),
        phi_pow(1),
    ] {
        suite.push(SuiteCase {
            id: IdentityId::SelfPower,
            params: Params::with_x(x),
            prec: 256,
        });
    }
    for x in [svr(2, 1), svr(3, 1), svr(3, 2)] {
        suite.push(SuiteCase {
            id: IdentityId::DoubleSelfPower,
            params: Params::with_x(x),
            prec: 256,
        });
    }
    // equation 8 runs at 128 bits: its fraction trades depth for breadth
    for z in [
        pi_const().mul_rational(&rat(1, 4)),
        pi_const().mul_rational(&rat(1, 2)),
        pi_const(),
        svr(1, 1),
        svr(2, 1),
    ] {
        suite.push(SuiteCase {
            id: IdentityId::TanhCf,
            params: Params::with_z(z),
            prec: 128,
        });
    }
    for alpha in [svr(-2, 1), svr(1, 2), svr(1, 1), svr(2, 1)] {
        suite.push(SuiteCase {
            id: IdentityId::SumOfProducts,
            params: Params::with_alpha(alpha),
            prec: 256,
        });
    }
    suite
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
