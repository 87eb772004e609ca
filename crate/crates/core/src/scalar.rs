//! Exact scalars: complex rationals times monomials in a fixed set of
//! commuting formal symbols.
//!
//! A [`Scalar`] is a finite sum `Σ c_m · m` where each `c_m` is a complex
//! number with rational real and imaginary parts and `m` is a monomial in
//! the symbols of [`Symbol`]. Zero coefficients are never stored, so two
//! scalars are equal exactly when their term maps are equal.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rat = BigRational;
/// Complex number with exact rational parts.
pub type Cq = Complex<BigRational>;

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn cq(re: Rat, im: Rat) -> Cq {
    Complex::new(re, im)
}

pub fn cq_int(n: i64) -> Cq {
    Complex::new(rat(n, 1), Rat::zero())
}

pub fn cq_rat(num: i64, den: i64) -> Cq {
    Complex::new(rat(num, den), Rat::zero())
}

pub fn cq_i() -> Cq {
    Complex::new(Rat::zero(), Rat::one())
}

pub fn cq_to_f64(c: &Cq) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

fn cq_is_zero(c: &Cq) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

fn cq_is_one(c: &Cq) -> bool {
    c.re.is_one() && c.im.is_zero()
}

/// Formal symbols that may appear in scalar coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Lambda,
    Mu,
    Kappa,
    Epsilon,
    M1,
    M2,
    /// The single detuning symbol of the twisted-fibre family (m₁ = −m₂ = 𝔪).
    Mfrak,
    Eta1,
    Eta2,
    Mu1,
    Mu2,
}

impl Symbol {
    pub const ALL: [Symbol; 11] = [
        Symbol::Lambda,
        Symbol::Mu,
        Symbol::Kappa,
        Symbol::Epsilon,
        Symbol::M1,
        Symbol::M2,
        Symbol::Mfrak,
        Symbol::Eta1,
        Symbol::Eta2,
        Symbol::Mu1,
        Symbol::Mu2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Symbol::Lambda => "lambda",
            Symbol::Mu => "mu",
            Symbol::Kappa => "kappa",
            Symbol::Epsilon => "eps",
            Symbol::M1 => "m1",
            Symbol::M2 => "m2",
            Symbol::Mfrak => "m",
            Symbol::Eta1 => "eta1",
            Symbol::Eta2 => "eta2",
            Symbol::Mu1 => "mu1",
            Symbol::Mu2 => "mu2",
        }
    }

    pub fn from_name(s: &str) -> Option<Symbol> {
        Symbol::ALL.iter().copied().find(|sym| sym.name() == s)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Symbol::from_name(&text).ok_or_else(|| serde::de::Error::custom(format!("unknown symbol {text}")))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Monomial in [`Symbol`]s: sorted `(symbol, exponent)` pairs, exponents > 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymMonomial(Vec<(Symbol, u32)>);

impl SymMonomial {
    pub fn one() -> Self {
        SymMonomial(Vec::new())
    }

    pub fn of(sym: Symbol) -> Self {
        SymMonomial(vec![(sym, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn degree(&self, sym: Symbol) -> u32 {
        self.0.iter().find(|(s, _)| *s == sym).map_or(0, |(_, e)| *e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Removes `sym` entirely, returning its exponent and the cofactor.
    pub fn split_off(&self, sym: Symbol) -> (u32, SymMonomial) {
        let e = self.degree(sym);
        (
            e,
            SymMonomial(self.0.iter().filter(|(s, _)| *s != sym).cloned().collect()),
        )
    }

    pub fn mul(&self, other: &SymMonomial) -> SymMonomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ea) = self.0[i];
            let (b, eb) = other.0[j];
            if a == b {
                out.push((a, ea + eb));
                i += 1;
                j += 1;
            } else if a < b {
                out.push((a, ea));
                i += 1;
            } else {
                out.push((b, eb));
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        SymMonomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn checked_div(&self, other: &SymMonomial) -> Option<SymMonomial> {
        let mut out = self.0.clone();
        for &(s, e) in &other.0 {
            let pos = out.iter().position(|(t, _)| *t == s)?;
            if out[pos].1 < e {
                return None;
            }
            out[pos].1 -= e;
            if out[pos].1 == 0 {
                out.remove(pos);
            }
        }
        Some(SymMonomial(out))
    }
}

impl fmt::Display for SymMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (s, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Exact polynomial in the formal symbols with complex-rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Scalar {
    terms: BTreeMap<SymMonomial, Cq>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_cq(cq_int(1))
    }

    pub fn i() -> Self {
        Scalar::from_cq(cq_i())
    }

    pub fn int(n: i64) -> Self {
        Scalar::from_cq(cq_int(n))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Scalar::from_cq(cq_rat(num, den))
    }

    pub fn from_cq(c: Cq) -> Self {
        Scalar::term(SymMonomial::one(), c)
    }

    pub fn sym(s: Symbol) -> Self {
        Scalar::term(SymMonomial::of(s), cq_int(1))
    }

    pub fn term(m: SymMonomial, c: Cq) -> Self {
        let mut terms = BTreeMap::new();
        if !cq_is_zero(&c) {
            terms.insert(m, c);
        }
        Scalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymMonomial, &Cq)> {
        self.terms.iter()
    }

    /// The value if this scalar carries no symbols.
    pub fn as_constant(&self) -> Option<Cq> {
        match self.terms.len() {
            0 => Some(cq_int(0)),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn mentions(&self, sym: Symbol) -> bool {
        self.terms.keys().any(|m| m.degree(sym) > 0)
    }

    pub fn degree(&self, sym: Symbol) -> u32 {
        self.terms.keys().map(|m| m.degree(sym)).max().unwrap_or(0)
    }

    fn insert_add(terms: &mut BTreeMap<SymMonomial, Cq>, m: SymMonomial, c: Cq) {
        use std::collections::btree_map::Entry;
        match terms.entry(m) {
            Entry::Vacant(v) => {
                if !cq_is_zero(&c) {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if cq_is_zero(o.get()) {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Cq) -> Scalar {
        if cq_is_zero(c) {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Replaces every occurrence of `sym` by `value`.
    pub fn substitute(&self, sym: Symbol, value: &Scalar) -> Scalar {
        if !self.mentions(sym) {
            return self.clone();
        }
        let mut out = Scalar::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(sym);
            let t = Scalar::term(rest, c.clone());
            out += &(&t * &value.pow(e));
        }
        out
    }

    /// Exact division by a single-term scalar (nonzero constant times a monomial).
    pub fn try_div_term(&self, divisor: &Scalar) -> Option<Scalar> {
        if divisor.terms.len() != 1 {
            return None;
        }
        let (dm, dc) = divisor.terms.iter().next().unwrap();
        let inv = Complex::new(Rat::one(), Rat::zero()) / dc.clone();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(m.checked_div(dm)?, c * &inv);
        }
        Some(Scalar { terms })
    }

    pub fn eval(&self, values: &dyn Fn(Symbol) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = cq_to_f64(c);
            for &(s, e) in m.factors() {
                t *= values(s).powu(e);
            }
            acc += t;
        }
        acc
    }

    /// Complex conjugate of the coefficients; symbols are treated as real.
    pub fn conj_coefficients(&self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<Symbol> for Scalar {
    fn from(s: Symbol) -> Self {
        Scalar::sym(s)
    }
}

impl From<Cq> for Scalar {
    fn from(c: Cq) -> Self {
        Scalar::from_cq(c)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> AddAssign<&'a Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &'a Scalar) {
        for (m, c) in &rhs.terms {
            Scalar::insert_add(&mut self.terms, m.clone(), c.clone());
        }
    }
}

impl<'a> SubAssign<&'a Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &'a Scalar) {
        for (m, c) in &rhs.terms {
            Scalar::insert_add(&mut self.terms, m.clone(), -c.clone());
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                Scalar::insert_add(&mut terms, ma.mul(mb), ca * cb);
            }
        }
        Scalar { terms }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(mut self, rhs: Scalar) -> Scalar {
        self += &rhs;
        self
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(mut self, rhs: Scalar) -> Scalar {
        self -= &rhs;
        self
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders a complex rational, parenthesized when both parts are nonzero.
pub fn fmt_cq(c: &Cq) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (true, true) => "0".into(),
        (false, true) => fmt_rat(&c.re),
        (true, false) => fmt_imag(&c.im),
        (false, false) => {
            let im = fmt_imag(&c.im.abs());
            let sign = if c.im.is_negative() { '-' } else { '+' };
            format!("({}{}{})", fmt_rat(&c.re), sign, im)
        }
    }
}

fn fmt_imag(im: &Rat) -> String {
    if im.is_one() {
        "i".into()
    } else if (-im).is_one() {
        "-i".into()
    } else {
        format!("{}*i", fmt_rat(im))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let body = if m.is_one() {
                fmt_cq(c)
            } else if cq_is_one(c) {
                m.to_string()
            } else if cq_is_one(&-c.clone()) {
                format!("-{m}")
            } else {
                format!("{}*{m}", fmt_cq(c))
            };
            if k == 0 {
                f.write_str(&body)?;
            } else if let Some(rest) = body.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("cannot parse scalar {input:?}: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| format!("bad number {text}"))?));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else {
            return Err(format!("unexpected character {ch:?}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Scalar, String> {
        let mut acc = if self.eat_op('-') {
            -self.term()?
        } else {
            self.eat_op('+');
            self.term()?
        };
        loop {
            if self.eat_op('+') {
                acc += &self.term()?;
            } else if self.eat_op('-') {
                acc -= &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Scalar, String> {
        let mut acc = self.factor()?;
        while self.eat_op('*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scalar, String> {
        if self.eat_op('-') {
            return Ok(-self.factor()?);
        }
        let base = match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let mut r = BigRational::from_integer(n);
                if self.eat_op('/') {
                    match self.toks.get(self.pos).cloned() {
                        Some(Tok::Num(d)) if !d.is_zero() => {
                            self.pos += 1;
                            r /= BigRational::from_integer(d);
                        }
                        _ => return Err("expected nonzero denominator".into()),
                    }
                }
                Scalar::from_cq(Complex::new(r, Rat::zero()))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "i" {
                    Scalar::i()
                } else {
                    let sym = Symbol::from_name(&name).ok_or(format!("unknown symbol {name}"))?;
                    Scalar::sym(sym)
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err("missing )".into());
                }
                inner
            }
            other => return Err(format!("unexpected token {other:?}")),
        };
        if self.eat_op('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(e)) => {
                    self.pos += 1;
                    let e = e.to_u32().ok_or("exponent too large")?;
                    return Ok(base.pow(e));
                }
                _ => return Err("expected exponent".into()),
            }
        }
        Ok(base)
    }
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| ParseScalarError {
            input: s.to_string(),
            reason,
        };
        let toks = tokenize(s).map_err(err)?;
        if toks.is_empty() {
            return Err(err("empty expression".into()));
        }
        let mut p = Parser { toks, pos: 0 };
        let v = p.expr().map_err(err)?;
        if p.pos != p.toks.len() {
            return Err(err(format!("trailing input at token {}", p.pos)));
        }
        Ok(v)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Minimal commutative-ring interface shared by [`Scalar`] and the
/// differential polynomials, so the loop algebra can carry either as
/// coefficients.
pub trait Ring: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Cq) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl Ring for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Cq) -> Self {
        Scalar::scale(self, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn canonical_zero_elimination() {
        let a = s("mu + 2*kappa");
        let b = s("-mu + 1/2");
        let sum = &a + &b;
        assert_eq!(sum, s("2*kappa + 1/2"));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn display_round_trips() {
        for text in ["0", "i", "-3/2*i*mu", "(1-3*i)*lambda^2 + kappa", "lambda*mu - 2"] {
            let v = s(text);
            assert_eq!(s(&v.to_string()), v, "{text} -> {v}");
        }
    }

    #[test]
    fn i_squared_is_minus_one() {
        assert_eq!(&Scalar::i() * &Scalar::i(), Scalar::int(-1));
    }

    #[test]
    fn substitute_symbol() {
        let v = s("mu^2 + mu*kappa");
        let out = v.substitute(Symbol::Mu, &s("2"));
        assert_eq!(out, s("4 + 2*kappa"));
    }

    #[test]
    fn division_by_term() {
        let v = s("2*i*eps*mu + 4*eps");
        assert_eq!(v.try_div_term(&s("2*eps")).unwrap(), s("i*mu + 2"));
        assert!(v.try_div_term(&s("kappa")).is_none());
    }

    #[test]
    fn parse_errors() {
        assert!("".parse::<Scalar>().is_err());
        assert!("zeta".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("(1 + mu".parse::<Scalar>().is_err());
    }
}
