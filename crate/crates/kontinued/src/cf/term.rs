//! Index rules: the map `n ↦ bₙ` (or `n ↦ aₙ`) of a continued fraction.
//!
//! A rule is a finite sum of groups `scale · p(n)` with each `scale` a
//! [`ScaleValue`] and each `p` a rational polynomial.  Exact-rational scales
//! are folded into a single rational polynomial at construction, so a rule
//! like `2·(n+1) + 3·n` normalises to `5n + 2`, while `z²·1 + (n-1)` keeps
//! the symbolic group `z²` separate.  This keeps zero detection and exact
//! evaluation honest: a term is reported as exactly zero only when that is
//! provable from the stored form.

use num_rational::BigRational;
use num_traits::Zero;

use crate::numerics::{BigReal, NumericsError, Prec};

use super::poly::PolyQ;
use super::scale::ScaleValue;

/// A partial-numerator or partial-denominator rule `n ↦ Σᵢ sᵢ·pᵢ(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TermRule {
    /// Normalised groups: at most one leading group with scale exactly one
    /// (the rational part), followed by symbolic/numeric groups with
    /// pairwise-distinct scales.
    groups: Vec<(ScaleValue, PolyQ)>,
}

impl TermRule {
    pub fn zero() -> Self {
        TermRule { groups: Vec::new() }
    }

    /// Rule given by a single rational polynomial.
    pub fn from_poly(p: PolyQ) -> Self {
        Self::sum(vec![(ScaleValue::one(), p)])
    }

    pub fn from_i64_coeffs(cs: &[i64]) -> Self {
        Self::from_poly(PolyQ::from_i64_coeffs(cs))
    }

    /// Constant rule `n ↦ s`.
    pub fn constant(s: ScaleValue) -> Self {
        Self::sum(vec![(s, PolyQ::from_i64_coeffs(&[1]))])
    }

    pub fn scaled(s: ScaleValue, p: PolyQ) -> Self {
        Self::sum(vec![(s, p)])
    }

    /// Build from groups, folding exact-rational scales into one rational
    /// polynomial and merging groups that share a scale.
    pub fn sum(groups: Vec<(ScaleValue, PolyQ)>) -> Self {
        let mut rational = PolyQ::zero();
        let mut rest: Vec<(ScaleValue, PolyQ)> = Vec::new();
        for (s, p) in groups {
            if s.is_exact_zero() || p.is_zero() {
                continue;
            }
            // canonicalise: move the rational factor of a symbolic scale into
            // the polynomial, so `phi·n` and `(-phi)·n` share one group key
            let (s, p) = match s {
                ScaleValue::Symbolic { factor, monomial } => (
                    ScaleValue::symbolic(BigRational::from_integer(1.into()), monomial),
                    p.scale(&factor),
                ),
                other => (other, p),
            };
            match s.exact() {
                Some(q) => rational = rational.add(&p.scale(q)),
                None => match rest.iter_mut().find(|(t, _)| *t == s) {
                    Some((_, acc)) => *acc = acc.add(&p),
                    None => rest.push((s, p)),
                },
            }
        }
        let mut out = Vec::with_capacity(rest.len() + 1);
        if !rational.is_zero() {
            out.push((ScaleValue::one(), rational));
        }
        out.extend(rest.into_iter().filter(|(_, p)| !p.is_zero()));
        TermRule { groups: out }
    }

    pub fn groups(&self) -> &[(ScaleValue, PolyQ)] {
        &self.groups
    }

    pub fn is_zero_rule(&self) -> bool {
        self.groups.is_empty()
    }

    /// Highest polynomial degree over all groups; `None` for the zero rule.
    pub fn degree(&self) -> Option<usize> {
        self.groups.iter().filter_map(|(_, p)| p.degree()).max()
    }

    /// Exact rational value at `n`, when provable: every group must either
    /// have an exact scale or a polynomial that vanishes at `n`.
    pub fn exact_at(&self, n: i64) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (s, p) in &self.groups {
            let v = p.eval_q(n);
            if v.is_zero() {
                continue;
            }
            acc += s.exact()? * v;
        }
        Some(acc)
    }

    /// Provably zero at `n`.  Cancellation across symbolic groups is not
    /// detected, but all rules built here vanish group-by-group when they
    /// vanish at all.
    pub fn is_exact_zero_at(&self, n: i64) -> bool {
        self.exact_at(n).is_some_and(|q| q.is_zero())
    }

    /// Resolve each group's scale to `p` bits (done once per evaluation run).
    pub fn materialize(&self, p: Prec) -> Result<Vec<BigReal>, NumericsError> {
        self.groups.iter().map(|(s, _)| s.value(p)).collect()
    }

    /// Value at `n` with pre-resolved scales, all arithmetic at `p` bits.
    pub fn eval_with(&self, n: i64, scales: &[BigReal], p: Prec) -> BigReal {
        debug_assert_eq!(scales.len(), self.groups.len());
        let mut acc = BigReal::zero(p);
        for ((s, poly), sv) in self.groups.iter().zip(scales) {
            let q = poly.eval_q(n);
            if q.is_zero() {
                continue;
            }
            let x = BigReal::from_rational(&q, p);
            let contrib = if s.exact().is_some() { x } else { sv.mul(&x, p) };
            acc = acc.add(&contrib, p);
        }
        acc
    }

    /// Convenience single-shot evaluation (materializes scales each call).
    pub fn eval(&self, n: i64, p: Prec) -> Result<BigReal, NumericsError> {
        let scales = self.materialize(p)?;
        Ok(self.eval_with(n, &scales, p))
    }

    /// Collapse to one `f64` polynomial `Σᵢ s̃ᵢ·pᵢ`, ascending coefficients.
    /// Used by the fast mining path; errors if a scale cannot be resolved.
    pub fn flatten_f64(&self) -> Result<Vec<f64>, NumericsError> {
        let len = self.degree().map_or(0, |d| d + 1);
        let mut out = vec![0.0; len];
        for (s, poly) in &self.groups {
            // resolve at a modest precision so the f64 value is correctly
            // rounded rather than doubly rounded from a short mantissa
            let sv = match s {
                ScaleValue::Exact(_) | ScaleValue::Numeric(_) => s.to_f64(),
                ScaleValue::Symbolic { .. } => s.value(96)?.to_f64(),
            };
            for (i, c) in poly.coeffs_f64().into_iter().enumerate() {
                out[i] += sv * c;
            }
        }
        Ok(out)
    }

    /// Multiply every group's scale by an exact rational.
    pub fn scale_by_rational(&self, q: &BigRational) -> Self {
        Self::sum(
            self.groups
                .iter()
                .map(|(s, p)| (s.mul_rational(q), p.clone()))
                .collect(),
        )
    }

    /// Product of two rules, distributing group-by-group:
    /// `(Σᵢ sᵢ·pᵢ)(Σⱼ tⱼ·qⱼ) = Σᵢⱼ (sᵢtⱼ)·(pᵢqⱼ)`.  Exact in all the cases
    /// the identity builders need (rational and symbolic scales).
    pub fn mul_rule(&self, o: &Self) -> Self {
        let mut groups = Vec::with_capacity(self.groups.len() * o.groups.len());
        for (s, p) in &self.groups {
            for (t, q) in &o.groups {
                groups.push((s.mul(t), p.mul(q)));
            }
        }
        Self::sum(groups)
    }

    /// Multiply every group's scale by an arbitrary scale.
    pub fn scale_by(&self, s: &ScaleValue) -> Self {
        Self::sum(
            self.groups
                .iter()
                .map(|(t, p)| (t.mul(s), p.clone()))
                .collect(),
        )
    }

    /// Multiply every group's polynomial by `m`.
    pub fn mul_poly(&self, m: &PolyQ) -> Self {
        Self::sum(
            self.groups
                .iter()
                .map(|(s, p)| (s.clone(), p.mul(m)))
                .collect(),
        )
    }

    /// Freeze the rule at a fixed index, producing a constant rule with the
    /// same value.  Used when printing `b(1) = …` override clauses.
    pub fn specialize(&self, n: i64) -> Self {
        Self::sum(
            self.groups
                .iter()
                .map(|(s, p)| (s.clone(), PolyQ::constant(p.eval_q(n))))
                .collect(),
        )
    }

    /// Pretty form such as `n^2 + phi*(2*n - 1)`; `0` for the zero rule.
    pub fn render(&self) -> String {
        if self.groups.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (s, p) in &self.groups {
            let piece = match s.exact() {
                Some(_) => p.render(),
                None => {
                    if p.degree() == Some(0) {
                        s.mul_rational(&p.coeffs()[0]).render()
                    } else {
                        format!("{}*({})", s.render(), p.render())
                    }
                }
            };
            if out.is_empty() {
                out.push_str(&piece);
            } else if let Some(rest) = piece.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&piece);
            }
        }
        out
    }
}
