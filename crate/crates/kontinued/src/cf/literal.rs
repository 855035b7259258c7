//! Text form for continued fractions.
//!
//! The canonical literal is
//!
//! ```text
//! cf(a0; b(n) = <expr>; a(n) = <expr>[; b(1) = <expr>][; a(1) = <expr>])
//! ```
//!
//! where each `<expr>` is built from integers, exact decimals, the index
//! variable `n`, named constants (`pi`, `phi`, `sqrt2`, …), parentheses, and
//! the operators `+ - * / ^` (integer powers only).  Division is restricted
//! to constant divisors so every rule stays a polynomial in `n`.  The
//! optional trailing clauses override the first partial numerator or
//! denominator, matching [`Gcf`](super::Gcf)'s override slots.
//!
//! Examples:
//!
//! ```text
//! cf(0; b(n) = 1; a(n) = 1)
//! cf(2; b(n) = -(2*n - 3)*(2*n - 1)^2*(2*n + 1); a(n) = 4*n + 2)
//! cf(1; b(n) = phi*n^2; a(n) = 2*n + 1; b(1) = phi)
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::numerics::constant_names;

use super::poly::PolyQ;
use super::scale::ScaleValue;
use super::term::TermRule;
use super::Gcf;

/// Parse failure with a byte offset into the literal.
#[derive(Debug, Clone, thiserror::Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct CfParseError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, CfParseError> {
    Err(CfParseError {
        pos,
        msg: msg.into(),
    })
}

// ---------------------------------------------------------------------------
// tokens
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str, base: usize) -> Result<Vec<(Tok, usize)>, CfParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = base + i;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, pos));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, pos));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, pos));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, pos));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, pos));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, pos));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, pos));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut frac_digits = 0usize;
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let fs = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac_digits = i - fs;
                }
                let mut exp10: i64 = 0;
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    let mut sign = 1i64;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        if bytes[j] == b'-' {
                            sign = -1;
                        }
                        j += 1;
                    }
                    let es = j;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j > es {
                        let e: i64 = src[es..j].parse().map_err(|_| CfParseError {
                            pos: base + es,
                            msg: "exponent out of range".into(),
                        })?;
                        exp10 = sign * e;
                        i = j;
                    }
                }
                let text = &src[start..i];
                let digits: String = text
                    .chars()
                    .take_while(|&ch| ch != 'e' && ch != 'E')
                    .filter(|&ch| ch != '.')
                    .collect();
                if digits.is_empty() {
                    return err(pos, "malformed number");
                }
                let mantissa: BigInt = digits.parse().map_err(|_| CfParseError {
                    pos,
                    msg: "malformed number".into(),
                })?;
                let shift = exp10 - frac_digits as i64;
                let ten = BigInt::from(10);
                let q = if shift >= 0 {
                    BigRational::from_integer(mantissa * ten.pow(shift as u32))
                } else {
                    BigRational::new(mantissa, ten.pow((-shift) as u32))
                };
                out.push((Tok::Num(q), pos));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), pos));
            }
            _ => return err(pos, format!("unexpected character {c:?}")),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// expression values: polynomials over constant monomials
// ---------------------------------------------------------------------------

/// `Σ monomial·p(n)` with each monomial a sorted power product of constant
/// names — the value domain of the expression grammar, closed under `+ - *`,
/// constant division, and integer powers.
#[derive(Debug, Clone)]
struct SymPoly {
    groups: Vec<(Vec<(String, i32)>, PolyQ)>,
}

impl SymPoly {
    fn constant(q: BigRational) -> Self {
        SymPoly {
            groups: vec![(Vec::new(), PolyQ::constant(q))],
        }
    }

    fn var() -> Self {
        SymPoly {
            groups: vec![(Vec::new(), PolyQ::var())],
        }
    }

    fn symbol(name: &str) -> Self {
        SymPoly {
            groups: vec![(
                vec![(name.to_string(), 1)],
                PolyQ::from_i64_coeffs(&[1]),
            )],
        }
    }

    fn push(&mut self, mono: Vec<(String, i32)>, poly: PolyQ) {
        if poly.is_zero() {
            return;
        }
        match self.groups.iter_mut().find(|(m, _)| *m == mono) {
            Some((_, acc)) => {
                *acc = acc.add(&poly);
                if acc.is_zero() {
                    self.groups.retain(|(_, p)| !p.is_zero());
                }
            }
            None => self.groups.push((mono, poly)),
        }
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, p) in &o.groups {
            out.push(m.clone(), p.clone());
        }
        out
    }

    fn neg(&self) -> Self {
        SymPoly {
            groups: self
                .groups
                .iter()
                .map(|(m, p)| (m.clone(), p.neg()))
                .collect(),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = SymPoly { groups: Vec::new() };
        for (ma, pa) in &self.groups {
            for (mb, pb) in &o.groups {
                out.push(merge_monomials(ma, mb), pa.mul(pb));
            }
        }
        out
    }

    /// The inverse, defined only for a single constant group.
    fn invert(&self) -> Option<Self> {
        match self.groups.as_slice() {
            [(mono, poly)] if poly.degree() == Some(0) => {
                let q = poly.coeffs()[0].clone();
                let inv_mono = mono.iter().map(|(n, k)| (n.clone(), -k)).collect();
                Some(SymPoly {
                    groups: vec![(inv_mono, PolyQ::constant(q.recip()))],
                })
            }
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.groups.is_empty()
    }

    fn max_degree(&self) -> usize {
        self.groups
            .iter()
            .filter_map(|(_, p)| p.degree())
            .max()
            .unwrap_or(0)
    }

    fn into_term_rule(self) -> TermRule {
        TermRule::sum(
            self.groups
                .into_iter()
                .map(|(mono, poly)| {
                    if mono.is_empty() {
                        (ScaleValue::one(), poly)
                    } else {
                        (ScaleValue::symbolic(BigRational::one(), mono), poly)
                    }
                })
                .collect(),
        )
    }
}

fn merge_monomials(a: &[(String, i32)], b: &[(String, i32)]) -> Vec<(String, i32)> {
    let mut out = a.to_vec();
    for (name, k) in b {
        match out.iter_mut().find(|(n, _)| n == name) {
            Some((_, acc)) => *acc += k,
            None => out.push((name.clone(), *k)),
        }
    }
    out.retain(|&(_, k)| k != 0);
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

// ---------------------------------------------------------------------------
// recursive-descent expression parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, p)| p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), CfParseError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            err(self.here(), format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<SymPoly, CfParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SymPoly, CfParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.here();
                    let rhs = self.factor()?;
                    match rhs.invert() {
                        Some(inv) => acc = acc.mul(&inv),
                        None => {
                            return err(at, "division is only defined for constant divisors")
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<SymPoly, CfParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<SymPoly, CfParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.here();
        let mut negative = false;
        if self.peek() == Some(&Tok::Minus) {
            negative = true;
            self.pos += 1;
        }
        let k = match self.bump() {
            Some(Tok::Num(q)) if q.is_integer() && !q.is_negative() => {
                let k = num_traits::ToPrimitive::to_i32(q.numer());
                match k {
                    Some(k) if k <= 16 => k,
                    _ => return err(at, "exponent too large (limit 16)"),
                }
            }
            _ => return err(at, "expected integer exponent"),
        };
        if negative {
            match base.invert() {
                Some(inv) => Ok(pow_sym(&inv, k)),
                None => err(at, "negative powers are only defined for constants"),
            }
        } else {
            Ok(pow_sym(&base, k))
        }
    }

    fn atom(&mut self) -> Result<SymPoly, CfParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num(q)) => Ok(SymPoly::constant(q)),
            Some(Tok::Ident(name)) if name == "n" => Ok(SymPoly::var()),
            Some(Tok::Ident(name)) => {
                if constant_names().contains(&name.as_str()) {
                    Ok(SymPoly::symbol(&name))
                } else {
                    err(at, format!("unknown constant {name:?}"))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            _ => err(at, "expected a number, constant, `n`, or parenthesis"),
        }
    }
}

fn pow_sym(base: &SymPoly, k: i32) -> SymPoly {
    let mut acc = SymPoly::constant(BigRational::one());
    for _ in 0..k {
        acc = acc.mul(base);
    }
    acc
}

fn parse_expr_str(src: &str, base: usize) -> Result<SymPoly, CfParseError> {
    let toks = tokenize(src, base)?;
    let end = base + src.len();
    let mut p = Parser { toks, pos: 0, end };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return err(p.here(), "unexpected trailing input in expression");
    }
    if v.is_zero() {
        return Ok(SymPoly { groups: Vec::new() });
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// clause structure
// ---------------------------------------------------------------------------

/// Parse a `cf(…)` literal.
///
/// The three mandatory clauses are the leading term, `b(n) = …`, and
/// `a(n) = …`; the optional `b(1)`/`a(1)` clauses (in either order) override
/// the first partial numerator and denominator.
pub fn parse_cf(input: &str) -> Result<Gcf, CfParseError> {
    let s = input.trim_end();
    let lead = input.len() - input.trim_start().len();
    let body = s.trim_start();
    let Some(stripped) = body.strip_prefix("cf(") else {
        return err(lead, "expected literal to start with `cf(`");
    };
    let Some(inner) = stripped.strip_suffix(')') else {
        return err(lead + body.len(), "expected literal to end with `)`");
    };
    let inner_base = lead + 3;

    // split the clause list on semicolons (the grammar keeps `;` out of
    // expressions, so a flat split is exact)
    let mut clauses: Vec<(usize, &str)> = Vec::new();
    let mut start = 0usize;
    for (i, ch) in inner.char_indices() {
        if ch == ';' {
            clauses.push((inner_base + start, &inner[start..i]));
            start = i + 1;
        }
    }
    clauses.push((inner_base + start, &inner[start..]));

    if clauses.len() < 3 {
        return err(
            inner_base + inner.len(),
            "a literal needs at least `a0; b(n) = …; a(n) = …`",
        );
    }

    let (a0_base, a0_src) = clauses[0];
    let a0_val = parse_expr_str(a0_src, a0_base)?;
    if a0_val.max_degree() > 0 {
        return err(a0_base, "leading term must not depend on n");
    }
    let a0 = a0_val.into_term_rule();

    let mut b_rule: Option<TermRule> = None;
    let mut a_rule: Option<TermRule> = None;
    let mut b1: Option<TermRule> = None;
    let mut a1: Option<TermRule> = None;

    for &(base, src) in &clauses[1..] {
        let (kind, idx, rest, rest_base) = split_rule_clause(src, base)?;
        let rule = parse_expr_str(rest, rest_base)?.into_term_rule();
        let slot = match (kind, idx) {
            ('b', 'n') => &mut b_rule,
            ('a', 'n') => &mut a_rule,
            ('b', '1') => &mut b1,
            ('a', '1') => &mut a1,
            _ => unreachable!(),
        };
        if slot.is_some() {
            return err(base, format!("duplicate clause {kind}({idx})"));
        }
        *slot = Some(rule);
    }

    let Some(b) = b_rule else {
        return err(inner_base + inner.len(), "missing clause b(n) = …");
    };
    let Some(a) = a_rule else {
        return err(inner_base + inner.len(), "missing clause a(n) = …");
    };

    let mut cf = Gcf::new(a0, b, a);
    if let Some(r) = b1 {
        cf = cf.with_first_numerator(r);
    }
    if let Some(r) = a1 {
        cf = cf.with_first_denominator(r);
    }
    Ok(cf)
}

/// Split `b(n) = rest` / `a(1) = rest` into its parts, whitespace-tolerant.
fn split_rule_clause(src: &str, base: usize) -> Result<(char, char, &str, usize), CfParseError> {
    let mut it = src.char_indices().filter(|&(_, c)| !c.is_whitespace());
    let mut expect_char = |wanted: &str| -> Result<(usize, char), CfParseError> {
        match it.next() {
            Some((i, c)) if wanted.contains(c) => Ok((i, c)),
            Some((i, c)) => err(base + i, format!("expected one of `{wanted}`, found {c:?}")),
            None => err(base + src.len(), format!("expected one of `{wanted}`")),
        }
    };
    let (_, kind) = expect_char("ba")?;
    expect_char("(")?;
    let (_, idx) = expect_char("n1")?;
    expect_char(")")?;
    let (eq_pos, _) = expect_char("=")?;
    let rest_start = eq_pos + 1;
    Ok((kind, idx, &src[rest_start..], base + rest_start))
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

/// Canonical literal form; `parse_cf(render(cf))` reproduces the rule values
/// (override clauses are printed specialized at `n = 1`).
pub(super) fn render(cf: &Gcf) -> String {
    let mut s = format!(
        "cf({}; b(n) = {}; a(n) = {}",
        cf.a0().render(),
        cf.b_rule().render(),
        cf.a_rule().render()
    );
    if let Some(b1) = cf.b1_override() {
        s.push_str(&format!("; b(1) = {}", b1.specialize(1).render()));
    }
    if let Some(a1) = cf.a1_override() {
        s.push_str(&format!("; a(1) = {}", a1.specialize(1).render()));
    }
    s.push(')');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_literal() {
        let cf = parse_cf("cf(0; b(n) = 1; a(n) = 1)").unwrap();
        assert!(cf.a0().is_exact_zero_at(0));
        assert_eq!(cf.b_rule().render(), "1");
        assert_eq!(cf.a_rule().render(), "1");
        assert!(cf.b1_override().is_none());
    }

    #[test]
    fn polynomials_and_whitespace() {
        let cf = parse_cf("cf( -2 ;  b(n)= -n^2 + 3*n - 1/2 ; a(n) =2*n+1 )").unwrap();
        assert_eq!(cf.a0().exact_at(0).unwrap().to_string(), "-2");
        assert_eq!(cf.b_rule().exact_at(2).unwrap().to_string(), "3/2");
        assert_eq!(cf.a_rule().exact_at(3).unwrap().to_string(), "7");
    }

    #[test]
    fn products_powers_parens() {
        let cf = parse_cf("cf(2; b(n) = -(2*n-3)*(2*n-1)^2*(2*n+1); a(n) = 4*n+2)").unwrap();
        // n = 2: -(1)(9)(5) = -45
        assert_eq!(cf.b_rule().exact_at(2).unwrap().to_string(), "-45");
        assert_eq!(cf.b_rule().degree(), Some(4));
    }

    #[test]
    fn symbolic_rules_and_overrides() {
        let cf =
            parse_cf("cf(1; b(n) = phi*n^2; a(n) = n + sqrt2; b(1) = phi; a(1) = 3/2)").unwrap();
        assert_eq!(cf.b_rule().groups().len(), 1);
        assert!(cf.b1_override().is_some());
        assert_eq!(
            cf.a1_override().unwrap().exact_at(1).unwrap().to_string(),
            "3/2"
        );
    }

    #[test]
    fn constant_division_and_negative_power() {
        let cf = parse_cf("cf(0; b(n) = n/2; a(n) = phi^-1)").unwrap();
        assert_eq!(cf.b_rule().exact_at(3).unwrap().to_string(), "3/2");
        assert_eq!(cf.a_rule().render(), "phi^-1");
    }

    #[test]
    fn decimal_and_exponent_numbers() {
        let cf = parse_cf("cf(0.25; b(n) = 1.5e2; a(n) = 1e-2)").unwrap();
        assert_eq!(cf.a0().exact_at(0).unwrap().to_string(), "1/4");
        assert_eq!(cf.b_rule().exact_at(1).unwrap().to_string(), "150");
        assert_eq!(cf.a_rule().exact_at(1).unwrap().to_string(), "1/100");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_cf("cf(0; b(n) = 1)").is_err()); // missing a(n)
        assert!(parse_cf("(0; b(n) = 1; a(n) = 1)").is_err()); // no cf prefix
        assert!(parse_cf("cf(n; b(n) = 1; a(n) = 1)").is_err()); // n in a0
        assert!(parse_cf("cf(0; b(n) = xi; a(n) = 1)").is_err()); // unknown name
        assert!(parse_cf("cf(0; b(n) = 1/n; a(n) = 1)").is_err()); // poly divisor
        assert!(parse_cf("cf(0; b(n) = n^-1; a(n) = 1)").is_err());
        assert!(parse_cf("cf(0; b(n) = 1 $; a(n) = 1)").is_err()); // stray char
        assert!(parse_cf("cf(0; b(n) = 1; a(n) = 1; b(1) = 2; b(1) = 3)").is_err());
        assert!(parse_cf("cf(0; c(n) = 1; a(n) = 1)").is_err()); // bad rule name
    }

    #[test]
    fn error_positions_point_into_input() {
        let e = parse_cf("cf(0; b(n) = 1 + zz; a(n) = 1)").unwrap_err();
        assert_eq!(&"cf(0; b(n) = 1 + zz; a(n) = 1)"[e.pos..e.pos + 2], "zz");
    }

    #[test]
    fn render_round_trip() {
        let inputs = [
            "cf(0; b(n) = 1; a(n) = 1)",
            "cf(2; b(n) = -4*n^4 + 8*n^3 + 3*n^2 - 5*n + 3; a(n) = 4*n + 2)",
            "cf(1; b(n) = phi*(n + 1); a(n) = 2*n + 1; b(1) = phi; a(1) = 3/2)",
            "cf(-1/2; b(n) = n^2 - sqrt2*(n - 1); a(n) = n + 3)",
        ];
        for src in inputs {
            let cf = parse_cf(src).unwrap();
            let printed = cf.render();
            let reparsed = parse_cf(&printed).unwrap();
            assert_eq!(
                reparsed.render(),
                printed,
                "canonical form must be stable for {src}"
            );
        }
    }
}
