//! A database of mathematical constants with exact defining expressions.
//!
//! Every entry stores an expression tree ([`ConstExpr`]) over rationals,
//! named constants and the special functions of [`crate::numerics`], plus a
//! cache of high-precision decimal digits evaluated from that tree.  The
//! digits are a *cache, not a source of truth*: re-evaluating the expression
//! reproduces them, and the test suite checks this on a sample.
//!
//! For discovery work the database also carries a sorted `f64` index of
//! *affine images* `q·c + r` of every constant `c`, with small rational `q`
//! and `r` (|q|, |r| ≤ 4, denominators up to 4).  A fast candidate value can
//! then be screened against tens of thousands of image values with one binary
//! search ([`ConstDb::prefilter_lookup`]); only survivors are escalated to
//! high-precision PSLQ confirmation ([`ConstDb::confirm_match`]), which
//! re-evaluates the constant at twice the requested precision so a cached or
//! coincidental agreement cannot confirm.
//!
//! The on-disk format is a tab-separated text file, one entry per line:
//!
//! ```text
//! id <TAB> expression <TAB> digits <TAB> comma,separated,tags
//! ```
//!
//! Saving and re-loading a database reproduces it bit-for-bit.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

use crate::numerics::{
    beta, constant_names, erf, erfi, gamma, named_constant, trusted_decimal_digits, BigReal,
    NumericsError, Prec,
};
use crate::pslq::{match_value, MatchReport, PslqError};

// ---------------------------------------------------------------------------
// expression trees
// ---------------------------------------------------------------------------

/// Built-in functions available in constant expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Gamma,
    Beta,
    Erf,
    Erfi,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Pow,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Gamma => "gamma",
            Func::Beta => "beta",
            Func::Erf => "erf",
            Func::Erfi => "erfi",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Beta | Func::Pow => 2,
            _ => 1,
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "gamma" => Func::Gamma,
            "beta" => Func::Beta,
            "erf" => Func::Erf,
            "erfi" => Func::Erfi,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "pow" => Func::Pow,
            _ => return None,
        })
    }
}

/// An exact expression defining a constant, e.g.
/// `gamma(1/4)*gamma(3/4)/pi` or `sqrt(pi/(2*e))*erfi(1/sqrt(2))`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstExpr {
    /// Exact rational literal.
    Rational(BigRational),
    /// Named constant from [`crate::numerics::named_constant`].
    Constant(String),
    Neg(Box<ConstExpr>),
    Add(Box<ConstExpr>, Box<ConstExpr>),
    Sub(Box<ConstExpr>, Box<ConstExpr>),
    Mul(Box<ConstExpr>, Box<ConstExpr>),
    Div(Box<ConstExpr>, Box<ConstExpr>),
    /// Integer power written with `^`.
    PowInt(Box<ConstExpr>, i32),
    /// Function application; `Pow` carries a general (real) exponent.
    Call(Func, Vec<ConstExpr>),
}

impl ConstExpr {
    pub fn integer(n: i64) -> Self {
        ConstExpr::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        ConstExpr::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn named(name: &str) -> Self {
        ConstExpr::Constant(name.to_string())
    }

    pub fn call(f: Func, args: Vec<ConstExpr>) -> Self {
        debug_assert_eq!(args.len(), f.arity());
        ConstExpr::Call(f, args)
    }

    /// Evaluate to `p` bits; all internal arithmetic runs with guard bits.
    pub fn eval(&self, p: Prec) -> Result<BigReal, NumericsError> {
        let wp = p + 32;
        Ok(self.eval_wp(wp)?.with_prec(p))
    }

    fn eval_wp(&self, wp: Prec) -> Result<BigReal, NumericsError> {
        match self {
            ConstExpr::Rational(q) => Ok(BigReal::from_rational(q, wp)),
            ConstExpr::Constant(name) => named_constant(name, wp),
            ConstExpr::Neg(a) => Ok(a.eval_wp(wp)?.neg()),
            ConstExpr::Add(a, b) => Ok(a.eval_wp(wp)?.add(&b.eval_wp(wp)?, wp)),
            ConstExpr::Sub(a, b) => Ok(a.eval_wp(wp)?.sub(&b.eval_wp(wp)?, wp)),
            ConstExpr::Mul(a, b) => Ok(a.eval_wp(wp)?.mul(&b.eval_wp(wp)?, wp)),
            ConstExpr::Div(a, b) => {
                let d = b.eval_wp(wp)?;
                if d.is_zero() {
                    return Err(NumericsError::Domain {
                        op: "div",
                        arg: "zero denominator".to_string(),
                    });
                }
                Ok(a.eval_wp(wp)?.div(&d, wp))
            }
            ConstExpr::PowInt(a, k) => Ok(a.eval_wp(wp)?.powi(i64::from(*k), wp)),
            ConstExpr::Call(f, args) => {
                let a = args[0].eval_wp(wp)?;
                match f {
                    Func::Gamma => gamma(&a, wp),
                    Func::Erf => Ok(erf(&a, wp)),
                    Func::Erfi => Ok(erfi(&a, wp)),
                    Func::Exp => Ok(a.exp(wp)),
                    Func::Ln => a.ln(wp),
                    Func::Sqrt => a.sqrt(wp),
                    Func::Tanh => Ok(a.tanh(wp)),
                    Func::Beta => {
                        let b = args[1].eval_wp(wp)?;
                        beta(&a, &b, wp)
                    }
                    Func::Pow => {
                        let b = args[1].eval_wp(wp)?;
                        a.pow(&b, wp)
                    }
                }
            }
        }
    }

    // precedence levels for rendering: 0 add/sub, 1 mul/div, 2 unary minus,
    // 3 power, 4 atom
    fn precedence(&self) -> u8 {
        match self {
            ConstExpr::Add(..) | ConstExpr::Sub(..) => 0,
            ConstExpr::Mul(..) | ConstExpr::Div(..) => 1,
            ConstExpr::Neg(..) => 2,
            ConstExpr::PowInt(..) => 3,
            ConstExpr::Rational(q) => {
                if q.is_negative() {
                    2
                } else if q.is_integer() {
                    4
                } else {
                    1 // renders with '/'
                }
            }
            ConstExpr::Constant(_) | ConstExpr::Call(..) => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let mine = self.precedence();
        let parens = mine < min;
        if parens {
            write!(f, "(")?;
        }
        match self {
            ConstExpr::Rational(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())?;
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())?;
                }
            }
            ConstExpr::Constant(name) => write!(f, "{name}")?,
            ConstExpr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 2)?;
            }
            ConstExpr::Add(a, b) => {
                a.fmt_prec(f, 0)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 1)?;
            }
            ConstExpr::Sub(a, b) => {
                a.fmt_prec(f, 0)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 1)?;
            }
            ConstExpr::Mul(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, "*")?;
                b.fmt_prec(f, 2)?;
            }
            ConstExpr::Div(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, "/")?;
                b.fmt_prec(f, 2)?;
            }
            ConstExpr::PowInt(a, k) => {
                a.fmt_prec(f, 4)?;
                write!(f, "^{k}")?;
            }
            ConstExpr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    arg.fmt_prec(f, 0)?;
                }
                write!(f, ")")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ConstExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

// ---------------------------------------------------------------------------
// expression parser
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
#[error("expression parse error at byte {pos}: {msg}")]
pub struct ExprParseError {
    pub pos: usize,
    pub msg: String,
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn new(src: &'a str) -> Self {
        ExprParser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprParseError> {
        Err(ExprParseError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_expr(&mut self) -> Result<ConstExpr, ExprParseError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = ConstExpr::Add(Box::new(acc), Box::new(self.parse_term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = ConstExpr::Sub(Box::new(acc), Box::new(self.parse_term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<ConstExpr, ExprParseError> {
        let mut acc = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = ConstExpr::Mul(Box::new(acc), Box::new(self.parse_factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = ConstExpr::Div(Box::new(acc), Box::new(self.parse_factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<ConstExpr, ExprParseError> {
        if self.eat(b'-') {
            return Ok(ConstExpr::Neg(Box::new(self.parse_factor()?)));
        }
        if self.eat(b'+') {
            return self.parse_factor();
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<ConstExpr, ExprParseError> {
        let base = self.parse_atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let digits = self.take_digits()?;
            let k: i32 = digits
                .parse()
                .map_err(|_| ExprParseError {
                    pos: self.pos,
                    msg: format!("integer exponent out of range: {digits}"),
                })?;
            let k = if neg { -k } else { k };
            return Ok(ConstExpr::PowInt(Box::new(base), k));
        }
        Ok(base)
    }

    fn take_digits(&mut self) -> Result<String, ExprParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .to_string())
    }

    fn parse_atom(&mut self) -> Result<ConstExpr, ExprParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.parse_expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.take_digits()?;
                let n: BigInt = digits.parse().expect("ascii digits");
                Ok(ConstExpr::Rational(BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("ascii identifier")
                    .to_string();
                if let Some(f) = Func::from_name(&name) {
                    if self.eat(b'(') {
                        let mut args = vec![self.parse_expr()?];
                        while self.eat(b',') {
                            args.push(self.parse_expr()?);
                        }
                        if !self.eat(b')') {
                            return self.err("expected ')' after arguments");
                        }
                        if args.len() != f.arity() {
                            return self.err(format!(
                                "{} takes {} argument(s), got {}",
                                f.name(),
                                f.arity(),
                                args.len()
                            ));
                        }
                        return Ok(ConstExpr::Call(f, args));
                    }
                    return self.err(format!("{name} is a function; expected a call"));
                }
                if constant_names().contains(&name.as_str()) {
                    Ok(ConstExpr::Constant(name))
                } else {
                    self.err(format!("unknown constant or function: {name}"))
                }
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parse an expression such as `2*sqrt(2)*gamma(1/4)*gamma(3/4)/pi`.
pub fn parse_expr(src: &str) -> Result<ConstExpr, ExprParseError> {
    let mut p = ExprParser::new(src);
    let e = p.parse_expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input after expression");
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// entries and the database
// ---------------------------------------------------------------------------

/// One database row: an identifier, its exact expression, cached digits and
/// free-form tags.
#[derive(Debug, Clone)]
pub struct ConstantEntry {
    pub id: String,
    pub expr: ConstExpr,
    /// Decimal rendering of the value at build precision, e.g.
    /// `2.6220575542e+0` (clipped here; real entries carry 1000+ digits).
    pub digits: String,
    pub tags: Vec<String>,
}

impl ConstantEntry {
    /// Value at `p` bits, served from the digit cache when it is deep
    /// enough, otherwise re-derived from the expression.
    pub fn value(&self, p: Prec) -> Result<BigReal, NumericsError> {
        let cached_digits = mantissa_digit_count(&self.digits);
        if cached_digits >= trusted_decimal_digits(p) + 2 {
            if let Ok(v) = BigReal::from_decimal_str(&self.digits, p) {
                return Ok(v);
            }
        }
        self.expr.eval(p)
    }

    /// Approximate `f64` value from the digit cache.
    pub fn value_f64(&self) -> f64 {
        parse_decimal_f64(&self.digits)
    }
}

/// Significant digits in the mantissa part of a decimal string.
fn mantissa_digit_count(s: &str) -> usize {
    s.split(['e', 'E'])
        .next()
        .unwrap_or("")
        .chars()
        .filter(|c| c.is_ascii_digit())
        .count()
}

/// Parse a decimal string of arbitrary length into the nearest `f64`
/// (sufficient accuracy comes from the leading 19 significant digits).
fn parse_decimal_f64(s: &str) -> f64 {
    // f64::from_str handles scientific notation but reads every digit; for
    // kilodigit strings clip the mantissa first
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let clipped: String = if mantissa.len() > 24 {
        format!("{}{}", &mantissa[..24], exp)
    } else {
        format!("{mantissa}{exp}")
    };
    clipped.parse().unwrap_or(f64::NAN)
}

/// One precomputed affine image `q·c + r` in the fast lookup index.
#[derive(Debug, Clone, Copy)]
struct AffineImage {
    value: f64,
    entry: u32,
    q_num: i8,
    q_den: u8,
    r_num: i8,
    r_den: u8,
}

/// A matched image from [`ConstDb::prefilter_lookup`]: candidate `y ≈ q·c+r`.
#[derive(Debug, Clone)]
pub struct PrefilterHit {
    pub entry_index: usize,
    pub id: String,
    /// The affine image that matched, as `(q, r)` rationals.
    pub q: (i64, u64),
    pub r: (i64, u64),
    pub image_value: f64,
}

#[derive(Debug, Error)]
pub enum ConstDbError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("evaluating {id}: {source}")]
    Eval {
        id: String,
        source: NumericsError,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("pslq: {0}")]
    Pslq(#[from] PslqError),
}

/// Outcome of [`ConstDb::confirm_match`].
#[derive(Debug, Clone)]
pub enum ConfirmOutcome {
    /// The relation held at twice the requested precision.
    Confirmed(MatchReport),
    /// No relation survived re-checking.
    Unconfirmed,
}

/// The constants database: entries plus the sorted affine-image index.
pub struct ConstDb {
    entries: Vec<ConstantEntry>,
    index: Vec<AffineImage>,
    prec: Prec,
}

impl ConstDb {
    /// Build a database from `(id, expr, tags)` sources, evaluating every
    /// expression at `prec` bits to fill the digit caches.
    pub fn build(
        sources: Vec<(String, ConstExpr, Vec<String>)>,
        prec: Prec,
    ) -> Result<ConstDb, ConstDbError> {
        let digits = trusted_decimal_digits(prec);
        let mut seen = HashSet::new();
        let mut entries = Vec::with_capacity(sources.len());
        for (id, expr, tags) in sources {
            if !seen.insert(id.clone()) {
                return Err(ConstDbError::DuplicateId(id));
            }
            let value = expr
                .eval(prec)
                .map_err(|source| ConstDbError::Eval {
                    id: id.clone(),
                    source,
                })?;
            entries.push(ConstantEntry {
                id,
                expr,
                digits: value.to_decimal_string(digits),
                tags,
            });
        }
        Ok(Self::assemble(entries, prec))
    }

    /// Build the standard catalogue shipped with the crate (about two
    /// hundred entries) at `prec` bits.
    pub fn build_base(prec: Prec) -> Result<ConstDb, ConstDbError> {
        ConstDb::build(base_sources(), prec)
    }

    /// Parse a specification file (same TSV layout, digits column may be
    /// empty) and evaluate it into a database.
    pub fn build_from_spec(text: &str, prec: Prec) -> Result<ConstDb, ConstDbError> {
        let mut sources = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 {
                return Err(ConstDbError::Parse {
                    line: line_no,
                    msg: "expected at least id<TAB>expression".to_string(),
                });
            }
            let expr = parse_expr(cols[1]).map_err(|e| ConstDbError::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            let tags = cols
                .get(3)
                .map(|t| split_tags(t))
                .unwrap_or_default();
            sources.push((cols[0].trim().to_string(), expr, tags));
        }
        ConstDb::build(sources, prec)
    }

    fn assemble(entries: Vec<ConstantEntry>, prec: Prec) -> ConstDb {
        let index = build_affine_index(&entries);
        ConstDb {
            entries,
            index,
            prec,
        }
    }

    pub fn entries(&self) -> &[ConstantEntry] {
        &self.entries
    }

    pub fn entry(&self, id: &str) -> Option<&ConstantEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Build precision of the cached digits.
    pub fn prec(&self) -> Prec {
        self.prec
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    // ---- persistence ----

    /// Serialize as TSV.  [`ConstDb::from_tsv`] inverts this bit-for-bit.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                e.id,
                e.expr,
                e.digits,
                e.tags.join(",")
            ));
        }
        out
    }

    /// Load a database previously produced by [`ConstDb::to_tsv`].  The
    /// cached digits are trusted as stored (tests re-derive a sample); the
    /// index is rebuilt.
    pub fn from_tsv(text: &str) -> Result<ConstDb, ConstDbError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(ConstDbError::Parse {
                    line: line_no,
                    msg: format!("expected 4 tab-separated columns, got {}", cols.len()),
                });
            }
            let id = cols[0].trim().to_string();
            if !seen.insert(id.clone()) {
                return Err(ConstDbError::DuplicateId(id));
            }
            let expr = parse_expr(cols[1]).map_err(|e| ConstDbError::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            let digits = cols[2].trim().to_string();
            if BigReal::from_decimal_str(&digits, 128).is_err() {
                return Err(ConstDbError::Parse {
                    line: line_no,
                    msg: format!("bad digit cache for {id}"),
                });
            }
            entries.push(ConstantEntry {
                id,
                expr,
                digits,
                tags: split_tags(cols[3]),
            });
        }
        // conservative: precision the shallowest digit cache still covers
        let min_digits = entries
            .iter()
            .map(|e| mantissa_digit_count(&e.digits))
            .min()
            .unwrap_or(0);
        let prec = ((min_digits as f64) / std::f64::consts::LOG10_2).floor() as usize + 64;
        Ok(Self::assemble(entries, prec.max(crate::numerics::MIN_PREC)))
    }

    pub fn save(&self, path: &Path) -> Result<(), ConstDbError> {
        std::fs::write(path, self.to_tsv())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ConstDb, ConstDbError> {
        let text = std::fs::read_to_string(path)?;
        ConstDb::from_tsv(&text)
    }

    // ---- lookup ----

    /// All affine images `q·c + r` with `|q·c + r − y| ≤ tol`, deduplicated
    /// to the closest image per entry.
    pub fn prefilter_lookup(&self, y: f64, tol: f64) -> Vec<PrefilterHit> {
        if !y.is_finite() {
            return Vec::new();
        }
        let lo = self
            .index
            .partition_point(|img| img.value < y - tol);
        let mut best: Vec<(usize, &AffineImage)> = Vec::new();
        for img in &self.index[lo..] {
            if img.value > y + tol {
                break;
            }
            let e = img.entry as usize;
            match best.iter_mut().find(|(idx, _)| *idx == e) {
                Some((_, cur)) => {
                    if (img.value - y).abs() < (cur.value - y).abs() {
                        *cur = img;
                    }
                }
                None => best.push((e, img)),
            }
        }
        best.into_iter()
            .map(|(e, img)| PrefilterHit {
                entry_index: e,
                id: self.entries[e].id.clone(),
                q: (img.q_num as i64, img.q_den as u64),
                r: (img.r_num as i64, img.r_den as u64),
                image_value: img.value,
            })
            .collect()
    }

    /// Confirm that `y` satisfies an integer relation `p·y + q·c + r = 0`
    /// with the entry's constant `c`.  The constant is re-evaluated at
    /// `2·prec` and the relation must hold at the `prec` threshold there;
    /// `y` should carry at least `2·prec` bits for the recheck to mean
    /// anything.
    pub fn confirm_match(
        &self,
        y: &BigReal,
        entry_index: usize,
        max_norm: u64,
        prec: Prec,
    ) -> Result<ConfirmOutcome, ConstDbError> {
        let entry = &self.entries[entry_index];
        let c = entry.value(prec).map_err(|source| ConstDbError::Eval {
            id: entry.id.clone(),
            source,
        })?;
        let candidates = vec![(entry.id.clone(), c)];
        let hits = match_value(y, &candidates, max_norm, prec)?;
        let Some(best) = hits.into_iter().next() else {
            return Ok(ConfirmOutcome::Unconfirmed);
        };
        // recheck at twice the precision: a cached-digit coincidence or a
        // lucky low-precision match cannot survive this
        let hp = prec * 2;
        let c_hi = entry.value(hp).map_err(|source| ConstDbError::Eval {
            id: entry.id.clone(),
            source,
        })?;
        let resid = crate::pslq::relation_residual(
            &[y.clone(), c_hi, BigReal::one(hp)],
            &best.relation,
            hp,
        )
        .abs();
        let thresh = residual_threshold(y, prec);
        if resid <= thresh {
            Ok(ConfirmOutcome::Confirmed(best))
        } else {
            Ok(ConfirmOutcome::Unconfirmed)
        }
    }
}

/// Confirmation threshold `2^(64−prec)·max(1, |y|)`.
fn residual_threshold(y: &BigReal, prec: Prec) -> BigReal {
    BigReal::pow2(-(prec as i64) + 64, prec).mul(&y.norm_scale(prec), prec)
}

fn split_tags(t: &str) -> Vec<String> {
    t.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.to_string())
        .collect()
}

// ---------------------------------------------------------------------------
// the affine-image index
// ---------------------------------------------------------------------------

/// Small rationals n/d with |n/d| ≤ 4 and d ≤ 2, reduced.  Used for both the
/// multiplier `q` (zero excluded) and the shift `r` (zero included).
fn affine_rationals(include_zero: bool) -> Vec<(i8, u8)> {
    let mut out = Vec::new();
    if include_zero {
        out.push((0, 1));
    }
    for d in 1..=2u8 {
        for n in 1..=(4 * d as i16) {
            let n = n as i8;
            if d > 1 && n % d as i8 == 0 {
                continue; // not reduced
            }
            out.push((n, d));
            out.push((-n, d));
        }
    }
    out
}

fn build_affine_index(entries: &[ConstantEntry]) -> Vec<AffineImage> {
    let qs = affine_rationals(false);
    let rs = affine_rationals(true);
    let mut index = Vec::with_capacity(entries.len() * qs.len() * rs.len());
    for (ei, e) in entries.iter().enumerate() {
        let c = e.value_f64();
        if !c.is_finite() {
            continue;
        }
        for &(qn, qd) in &qs {
            let qc = (qn as f64) * c / (qd as f64);
            for &(rn, rd) in &rs {
                let v = qc + (rn as f64) / (rd as f64);
                if v.is_finite() {
                    index.push(AffineImage {
                        value: v,
                        entry: ei as u32,
                        q_num: qn,
                        q_den: qd,
                        r_num: rn,
                        r_den: rd,
                    });
                }
            }
        }
    }
    index.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite values"));
    index
}

// ---------------------------------------------------------------------------
// the standard catalogue
// ---------------------------------------------------------------------------

fn src(id: &str, expr: &str, tags: &str) -> (String, ConstExpr, Vec<String>) {
    let parsed = parse_expr(expr)
        .unwrap_or_else(|e| panic!("bad builtin expression for {id}: {e}"));
    (id.to_string(), parsed, split_tags(tags))
}

/// The sources for [`ConstDb::build_base`]: named constants, algebraic
/// numbers, logarithms, gamma values and quotients, error-function and
/// hyperbolic closed forms, and low-order products and powers of all of
/// these — the shapes that small-coefficient continued fractions actually
/// produce.
fn base_sources() -> Vec<(String, ConstExpr, Vec<String>)> {
    let mut v: Vec<(String, ConstExpr, Vec<String>)> = Vec::new();

    // named constants pass straight through
    for name in constant_names() {
        v.push(src(name, name, "named"));
    }

    // square roots beyond the named ones
    for k in [6i64, 7, 10, 11, 13, 15] {
        v.push(src(&format!("sqrt{k}"), &format!("sqrt({k})"), "algebraic"));
    }
    // low roots
    for (id, expr) in [
        ("cbrt2", "pow(2, 1/3)"),
        ("cbrt3", "pow(3, 1/3)"),
        ("cbrt4", "pow(4, 1/3)"),
        ("qrt5", "pow(5, 1/4)"),
        ("qrt2", "pow(2, 1/4)"),
    ] {
        v.push(src(id, expr, "algebraic,root"));
    }

    // logarithms
    for k in [5i64, 6, 7, 10] {
        v.push(src(&format!("ln{k}"), &format!("ln({k})"), "log"));
    }
    v.push(src("ln_pi", "ln(pi)", "log"));
    v.push(src("ln_phi", "ln(phi)", "log"));

    // gamma at small rationals
    for (p, q) in [
        (1i64, 3i64),
        (2, 3),
        (1, 4),
        (3, 4),
        (1, 5),
        (2, 5),
        (3, 5),
        (4, 5),
        (1, 6),
        (5, 6),
        (1, 8),
        (3, 8),
        (5, 8),
        (7, 8),
    ] {
        v.push(src(
            &format!("gamma_{p}_{q}"),
            &format!("gamma({p}/{q})"),
            "gamma",
        ));
    }

    // gamma quotients Γ(ξ+1/2)/Γ(ξ) on a quarter-integer grid; these are the
    // right-hand shapes of the gamma-quotient identity family
    for k in 1i64..=8 {
        v.push(src(
            &format!("gq_{k}_4"),
            &format!("gamma({k}/4 + 1/2)/gamma({k}/4)"),
            "gamma,quotient",
        ));
    }

    // powers and exponentials
    for (id, expr, tags) in [
        ("pi2", "pi^2", "power"),
        ("pi3", "pi^3", "power"),
        ("pi_sq_over6", "pi^2/6", "power,zeta"),
        ("e2", "e^2", "power"),
        ("e3", "e^3", "power"),
        ("sqrt_e", "exp(1/2)", "power"),
        ("inv_sqrt_e", "exp(-1/2)", "power"),
        ("exp_quarter", "exp(1/4)", "power"),
        ("e_to_pi", "pow(e, pi)", "power"),
        ("two_to_sqrt2", "pow(2, sqrt(2))", "power"),
        ("phi_to_phi", "pow(phi, phi)", "power,phi"),
        ("phi_to_2_over_phi", "pow(phi, 2/phi)", "power,phi"),
        ("sqrt_2pi", "sqrt(2*pi)", "power"),
        ("sqrt_pi", "sqrt(pi)", "power"),
    ] {
        v.push(src(id, expr, tags));
    }

    // error function and related closed forms (series values of the
    // sum-of-products family)
    for (id, expr, tags) in [
        ("erf1", "erf(1)", "erf"),
        ("erf2", "erf(2)", "erf"),
        ("erf_inv_sqrt2", "erf(1/sqrt(2))", "erf"),
        ("erfi1", "erfi(1)", "erf"),
        ("erfi_inv_sqrt2", "erfi(1/sqrt(2))", "erf"),
        ("erf_half", "erf(1/2)", "erf"),
        ("erfi_half", "erfi(1/2)", "erf"),
        (
            "sum_prod_alpha_m2",
            "-sqrt(pi/(2*e))*erfi(1/sqrt(2))",
            "erf,series",
        ),
        (
            "sum_prod_alpha_2",
            "-1 + sqrt(e*pi/2)*erf(1/sqrt(2))",
            "erf,series",
        ),
        ("sum_prod_alpha_half", "(e^2 - 5)/2", "series"),
        ("sum_prod_alpha_1", "e - 2", "series"),
    ] {
        v.push(src(id, expr, tags));
    }

    // hyperbolic values, including the classical tanh fraction landmarks
    for (id, expr) in [
        ("tanh1", "tanh(1)"),
        ("tanh2", "tanh(2)"),
        ("tanh_half", "tanh(1/2)"),
        ("tanh_pi_4", "tanh(pi/4)"),
        ("tanh_pi_2", "tanh(pi/2)"),
        ("tanh_pi", "tanh(pi)"),
        ("tanh_pi_8", "tanh(pi/8)"),
    ] {
        v.push(src(id, expr, "hyperbolic"));
    }

    // beta values at small rationals
    for (p1, q1, p2, q2) in [
        (1i64, 3i64, 1i64, 3i64),
        (1, 4, 1, 4),
        (1, 3, 2, 3),
        (1, 4, 3, 4),
        (2, 5, 3, 5),
        (1, 6, 5, 6),
    ] {
        v.push(src(
            &format!("beta_{p1}_{q1}_{p2}_{q2}"),
            &format!("beta({p1}/{q1}, {p2}/{q2})"),
            "beta",
        ));
    }

    // simple combinations that show up when CF values are normalised
    for (id, expr, tags) in [
        ("pi_times_e", "pi*e", "combo"),
        ("pi_plus_e", "pi + e", "combo"),
        ("pi_minus_e", "pi - e", "combo"),
        ("pi_over_e", "pi/e", "combo"),
        ("e_over_pi", "e/pi", "combo"),
        ("pi_ln2", "pi*ln(2)", "combo"),
        ("e_ln2", "e*ln(2)", "combo"),
        ("pi_sqrt2", "pi*sqrt(2)", "combo"),
        ("pi_sqrt3", "pi*sqrt(3)", "combo"),
        ("phi_sqrt5", "phi*sqrt(5)", "combo"),
        ("catalan_8_pi2", "8*catalan/pi^2", "combo"),
        ("zeta3_over_pi3", "zeta3/pi^3", "combo"),
        ("gamma14_4th_over_pi3", "gamma(1/4)^4/pi^3", "combo,gamma"),
        ("lemniscate_over_pi", "lemniscate/pi", "combo,lemniscate"),
        ("agm_like", "pi/(2*lemniscate)", "combo,lemniscate"),
        ("euler_gamma_sq", "euler_gamma^2", "combo"),
        ("exp_euler_gamma", "exp(euler_gamma)", "combo"),
        ("ln2_sq", "ln(2)^2", "combo"),
        ("ln2_ln3", "ln(2)*ln(3)", "combo"),
    ] {
        v.push(src(id, expr, tags));
    }

    // reciprocal and scaled named constants (distinct shapes under the
    // affine map, which only adds rational multiples)
    for (id, expr) in [
        ("inv_pi", "1/pi"),
        ("inv_e", "1/e"),
        ("inv_phi", "1/phi"),
        ("inv_sqrt2", "1/sqrt(2)"),
        ("inv_sqrt3", "1/sqrt(3)"),
        ("inv_ln2", "1/ln(2)"),
        ("pi_sq_over_8", "pi^2/8"),
        ("pi_4th", "pi^4"),
        ("e_4th", "e^4"),
        ("phi_sq", "phi^2"),
        ("phi_cubed", "phi^3"),
        ("sqrt2_cubed", "sqrt(2)^3"),
        ("sqrt3_cubed", "sqrt(3)^3"),
        ("sqrt5_cubed", "sqrt(5)^3"),
    ] {
        v.push(src(id, expr, "derived"));
    }

    // exp at small rational points
    for k in [2i64, 3] {
        v.push(src(&format!("exp_1_{k}"), &format!("exp(1/{k})"), "power"));
        v.push(src(
            &format!("exp_m1_{k}"),
            &format!("exp(-1/{k})"),
            "power",
        ));
    }

    // gamma-quotient shapes with an extra half shift: Γ(ξ+1/2)/Γ(ξ+1)
    for k in 1i64..=6 {
        v.push(src(
            &format!("gqh_{k}_4"),
            &format!("gamma({k}/4 + 1/2)/gamma({k}/4 + 1)"),
            "gamma,quotient",
        ));
    }

    // products of gamma values against pi (lemniscate-adjacent shapes)
    for (id, expr) in [
        ("gamma14_sq_over_pi", "gamma(1/4)^2/pi"),
        ("gamma13_cubed_over_pi", "gamma(1/3)^3/pi"),
        ("gamma14_gamma34", "gamma(1/4)*gamma(3/4)"),
        ("gamma13_gamma23", "gamma(1/3)*gamma(2/3)"),
        ("gamma16_over_gamma13", "gamma(1/6)/gamma(1/3)"),
        ("gamma18_over_gamma38", "gamma(1/8)/gamma(3/8)"),
    ] {
        v.push(src(id, expr, "gamma,combo"));
    }

    // ln of gamma landmarks and misc transcendental fillers
    for (id, expr) in [
        ("ln_gamma14", "ln(gamma(1/4))"),
        ("ln_sqrt_2pi", "ln(sqrt(2*pi))"),
        ("one_over_e_minus_1", "1/(e - 1)"),
        ("e_over_e_minus_1", "e/(e - 1)"),
        ("tanh1_times_e", "tanh(1)*e"),
        ("sinh_like", "(e - 1/e)/2"),
        ("cosh_like", "(e + 1/e)/2"),
        ("sinh_half", "(exp(1/2) - exp(-1/2))/2"),
        ("cosh_half", "(exp(1/2) + exp(-1/2))/2"),
        ("erf1_sq", "erf(1)^2"),
        ("erf1_times_pi", "erf(1)*pi"),
        ("catalan_pi", "catalan*pi"),
        ("zeta3_pi", "zeta3*pi"),
        ("euler_gamma_pi", "euler_gamma*pi"),
        ("lemniscate_sq", "lemniscate^2"),
        ("pi_over_ln2", "pi/ln(2)"),
        ("ln2_over_pi", "ln(2)/pi"),
        ("sqrt_pi_over_2", "sqrt(pi/2)"),
        ("sqrt_pi_over_e", "sqrt(pi/e)"),
        ("sqrt_e_pi", "sqrt(e*pi)"),
    ] {
        v.push(src(id, expr, "combo"));
    }

    v
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_round_trip() {
        for s in [
            "gamma(1/4)*gamma(3/4)/pi",
            "-sqrt(pi/(2*e))*erfi(1/sqrt(2))",
            "(e^2 - 5)/2",
            "pow(phi, 2/phi)",
            "1 - 2/(3 + pi)",
            "pi^2/6",
            "2^-3",
            "beta(1/3, 2/3)",
        ] {
            let e = parse_expr(s).unwrap();
            let rendered = e.to_string();
            let e2 = parse_expr(&rendered).unwrap();
            assert_eq!(e, e2, "round trip through `{rendered}` for `{s}`");
        }
    }

    #[test]
    fn expression_parse_errors() {
        assert!(parse_expr("bogus_name").is_err());
        assert!(parse_expr("gamma(1/4").is_err());
        assert!(parse_expr("beta(1)").is_err());
        assert!(parse_expr("1 + ").is_err());
        assert!(parse_expr("pi pi").is_err());
        assert!(parse_expr("sqrt").is_err());
    }

    #[test]
    fn eval_against_reference_values() {
        let p = 256;
        // leading digits of Γ(1/4)Γ(3/4) = π√2 = 4.44288293815…
        let e = parse_expr("gamma(1/4)*gamma(3/4)").unwrap();
        let v = e.eval(p).unwrap();
        let want = parse_expr("pi*sqrt(2)").unwrap().eval(p).unwrap();
        assert!(v.sub(&want, p).abs().le_pow2(-(p as i64) + 16));
        // (e² − 5)/2 = 1.19452804946532511361521373028750…
        let e = parse_expr("(e^2 - 5)/2").unwrap();
        let s = e.eval(p).unwrap().to_display_string(30);
        assert!(s.starts_with("1.1945280494653251136152137302"), "{s}");
        // division by an exactly-zero denominator is a domain error
        assert!(parse_expr("1/(2 - 2)").unwrap().eval(p).is_err());
    }

    #[test]
    fn base_catalogue_builds_and_round_trips() {
        let prec = 320; // fast build for the test; the shipped file is deeper
        let db = ConstDb::build_base(prec).unwrap();
        assert!(db.len() >= 150, "catalogue has {} entries", db.len());
        let tsv = db.to_tsv();
        let db2 = ConstDb::from_tsv(&tsv).unwrap();
        assert_eq!(db2.to_tsv(), tsv, "TSV round trip must be bit-exact");
        assert_eq!(db2.len(), db.len());
    }

    #[test]
    fn cached_digits_rederive_from_expressions() {
        // the digit cache is redundant: re-evaluating the expression must
        // reproduce every stored digit (sampled here to keep the test quick)
        let prec = 320;
        let db = ConstDb::build_base(prec).unwrap();
        for id in ["phi", "gq_2_4", "sum_prod_alpha_m2", "tanh_pi_4", "cbrt4"] {
            let e = db.entry(id).unwrap();
            let fresh = e.expr.eval(prec).unwrap();
            let digits = trusted_decimal_digits(prec);
            assert_eq!(
                fresh.to_decimal_string(digits),
                e.digits,
                "digit cache for {id} does not re-derive"
            );
        }
    }

    #[test]
    fn prefilter_finds_affine_images() {
        let db = ConstDb::build_base(256).unwrap();
        // φ − 1 should hit the phi entry with (q, r) = (1, −1)
        let y = 0.6180339887498949;
        let hits = db.prefilter_lookup(y, 1e-9);
        let phi_hit = hits.iter().find(|h| h.id == "phi").expect("phi hit");
        assert_eq!(phi_hit.q, (1, 1));
        assert_eq!(phi_hit.r, (-1, 1));
        // (e² − 5)/2 is a half-integer affine image of e²
        let y = (std::f64::consts::E.powi(2) - 5.0) / 2.0;
        let hits = db.prefilter_lookup(y, 1e-9);
        assert!(hits.iter().any(|h| h.id == "e2"), "e2 not hit: {hits:?}");
    }

    #[test]
    fn prefilter_misses_generic_values() {
        let db = ConstDb::build_base(256).unwrap();
        // a pseudorandom value should survive the 1e−9 window almost never;
        // use a fixed value measured to be clean
        let hits = db.prefilter_lookup(0.5772156648, 1e-11);
        // (close to euler_gamma but off by 1e-9 > 1e-11 tolerance)
        assert!(
            hits.iter().all(|h| h.id != "euler_gamma"),
            "tolerance window leaked"
        );
    }

    #[test]
    fn confirm_match_accepts_true_and_rejects_noise() {
        let prec = 256;
        let db = ConstDb::build_base(prec).unwrap();
        let phi_idx = db
            .entries()
            .iter()
            .position(|e| e.id == "phi")
            .unwrap();
        // true value with deep precision: y = phi − 1
        let y = named_constant("phi", 2 * prec)
            .unwrap()
            .sub(&BigReal::one(2 * prec), 2 * prec);
        match db.confirm_match(&y, phi_idx, 16, prec).unwrap() {
            ConfirmOutcome::Confirmed(m) => {
                assert_eq!(
                    m.relation,
                    [BigInt::from(1), BigInt::from(-1), BigInt::from(1)]
                );
            }
            ConfirmOutcome::Unconfirmed => panic!("true relation rejected"),
        }
        // noise near phi − 1 but wrong beyond f64 must not confirm
        let y_noise = BigReal::from_f64(0.6180339887498949, 2 * prec);
        match db.confirm_match(&y_noise, phi_idx, 16, prec).unwrap() {
            ConfirmOutcome::Unconfirmed => {}
            ConfirmOutcome::Confirmed(m) => {
                panic!("f64-level agreement confirmed: {:?}", m.relation)
            }
        }
    }

    #[test]
    fn spec_file_without_digits_builds() {
        let spec = "two_pi\t2*pi\t\tcustom\nhalf\t1/2\t\t\n";
        let db = ConstDb::build_from_spec(spec, 192).unwrap();
        assert_eq!(db.len(), 2);
        let v = db.entry("two_pi").unwrap().value(128).unwrap();
        let want = named_constant("pi", 160).unwrap().mul(&BigReal::from_i64(2, 160), 160);
        assert!(v.sub(&want.with_prec(128), 128).abs().le_pow2(-120));
        assert!(ConstDb::build_from_spec("oops\n", 128).is_err());
        assert!(ConstDb::build_from_spec("a\tpi\t\t\na\te\t\t\n", 128).is_err());
    }
}
