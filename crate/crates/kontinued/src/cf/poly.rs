//! Univariate polynomials with exact rational coefficients.
//!
//! These are the index rules of a continued fraction: a partial numerator or
//! denominator is a polynomial in the term index `n`.  Coefficients are
//! stored in ascending order with trailing zeros trimmed, so the zero
//! polynomial has an empty coefficient list and no degree.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Polynomial in one variable over ℚ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyQ {
    coeffs: Vec<BigRational>,
}

impl PolyQ {
    pub fn zero() -> Self {
        PolyQ { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `n`.
    pub fn var() -> Self {
        Self::from_coeffs(vec![BigRational::zero(), BigRational::one()])
    }

    /// Ascending coefficients `c0 + c1·n + c2·n² + …`; trailing zeros are
    /// dropped.
    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyQ { coeffs }
    }

    pub fn from_i64_coeffs(cs: &[i64]) -> Self {
        Self::from_coeffs(
            cs.iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Exact value at an integer index (Horner).
    pub fn eval_q(&self, n: i64) -> BigRational {
        let x = BigRational::from_integer(BigInt::from(n));
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &x + c;
        }
        acc
    }

    /// Approximate value at a float index (Horner).
    pub fn eval_f64(&self, n: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * n + rational_to_f64(c);
        }
        acc
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        let len = self.coeffs.len().max(o.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
            let b = o.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
            out.push(a + b);
        }
        Self::from_coeffs(out)
    }

    pub fn neg(&self) -> Self {
        PolyQ {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * q).collect())
    }

    /// Composition with a shifted index: `p(n + k)`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        // p(n+k) = Σ_i c_i·(n+k)^i, expanded with binomial coefficients
        let kq = BigRational::from_integer(BigInt::from(k));
        let deg = self.coeffs.len() - 1;
        let mut out = vec![BigRational::zero(); deg + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            // (n+k)^i: binomial row
            let mut binom = BigRational::one();
            let mut kpow = BigRational::one();
            for j in (0..=i).rev() {
                // coefficient of n^j in (n+k)^i is C(i, j)·k^(i-j)
                out[j] += c * &binom * &kpow;
                if j > 0 {
                    binom = binom * BigRational::from_integer(BigInt::from(j as i64))
                        / BigRational::from_integer(BigInt::from((i - j + 1) as i64));
                    kpow *= &kq;
                }
            }
        }
        Self::from_coeffs(out)
    }

    /// Positive rational content `gcd(numerators)/lcm(denominators)`, the
    /// largest `q` with `self/q` an integer-coefficient polynomial of content
    /// one.  Zero for the zero polynomial.
    pub fn content(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in &self.coeffs {
            g = g.gcd(&c.numer().abs());
            l = l.lcm(&c.denom().abs());
        }
        BigRational::new(g, l)
    }

    /// Upper bound on the magnitude of any root (Cauchy bound); `None` for
    /// constants and zero.
    pub fn root_bound(&self) -> Option<f64> {
        let deg = self.degree()?;
        if deg == 0 {
            return None;
        }
        let lead = rational_to_f64(&self.coeffs[deg]).abs();
        let max_rest = self.coeffs[..deg]
            .iter()
            .map(|c| rational_to_f64(c).abs())
            .fold(0.0f64, f64::max);
        Some(1.0 + max_rest / lead)
    }

    /// Pretty form like `2*n^2 - n + 1/2`; `0` for the zero polynomial.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = c.is_negative();
            if out.is_empty() {
                if sign {
                    out.push('-');
                }
            } else {
                out.push_str(if sign { " - " } else { " + " });
            }
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                out.push_str(&render_rational(&mag));
            }
            if i > 0 {
                if show_coeff {
                    out.push('*');
                }
                out.push('n');
                if i > 1 {
                    out.push_str(&format!("^{i}"));
                }
            }
        }
        out
    }
}

pub(crate) fn render_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}
