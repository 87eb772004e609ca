use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Cq, Ring, Scalar, Symbol};

pub trait Var: Clone + Ord + Eq + Hash + fmt::Debug + fmt::Display {}

impl<T: Clone + Ord + Eq + Hash + fmt::Debug + fmt::Display> Var for T {}

/// `λ^lambda · Π vᵢ^eᵢ`, factors sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono<V> {
    pub lambda: i32,
    vars: Vec<(V, u32)>,
}

impl<V: Var> Mono<V> {
    pub fn one() -> Self {
        Mono {
            lambda: 0,
            vars: Vec::new(),
        }
    }

    pub fn from_factors(lambda: i32, mut vars: Vec<(V, u32)>) -> Self {
        vars.retain(|(_, e)| *e > 0);
        vars.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(V, u32)> = Vec::with_capacity(vars.len());
        for (v, e) in vars {
            match merged.last_mut() {
                Some((w, f)) if *w == v => *f += e,
                _ => merged.push((v, e)),
            }
        }
        Mono { lambda, vars: merged }
    }

    pub fn factors(&self) -> &[(V, u32)] {
        &self.vars
    }

    pub fn degree(&self) -> u32 {
        self.vars.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: &V) -> u32 {
        self.vars.iter().find(|(w, _)| w == v).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.vars.len() + other.vars.len());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() && j < other.vars.len() {
            match self.vars[i].0.cmp(&other.vars[j].0) {
                std::cmp::Ordering::Equal => {
                    out.push((self.vars[i].0.clone(), self.vars[i].1 + other.vars[j].1));
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push(self.vars[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.vars[j].clone());
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.vars[i..]);
        out.extend_from_slice(&other.vars[j..]);
        Mono {
            lambda: self.lambda + other.lambda,
            vars: out,
        }
    }

    /// The monomial with one power of the factor at `idx` removed.
    fn drop_one(&self, idx: usize) -> Self {
        let mut vars = self.vars.clone();
        if vars[idx].1 == 1 {
            vars.remove(idx);
        } else {
            vars[idx].1 -= 1;
        }
        Mono {
            lambda: self.lambda,
            vars,
        }
    }
}

impl<V: Var> fmt::Display for Mono<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.lambda {
            0 => {}
            1 => parts.push("lambda".to_string()),
            k => parts.push(format!("lambda^{k}")),
        }
        for (v, e) in &self.vars {
            if *e == 1 {
                parts.push(v.to_string());
            } else {
                parts.push(format!("{v}^{e}"));
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

/// Polynomial in variables `V` and Laurent in `λ`, with [`Scalar`] coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly<V: Var> {
    terms: BTreeMap<Mono<V>, Scalar>,
}

impl<V: Var> Default for Poly<V> {
    fn default() -> Self {
        Poly { terms: BTreeMap::new() }
    }
}

impl<V: Var> Poly<V> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::term(Mono::one(), c)
    }

    pub fn var(v: V) -> Self {
        Self::term(
            Mono {
                lambda: 0,
                vars: vec![(v, 1)],
            },
            Scalar::one(),
        )
    }

    pub fn lambda(k: i32) -> Self {
        Self::term(
            Mono {
                lambda: k,
                vars: Vec::new(),
            },
            Scalar::one(),
        )
    }

    pub fn sym(s: Symbol) -> Self {
        Self::constant(Scalar::sym(s))
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Scalar::int(n))
    }

    pub fn term(m: Mono<V>, c: Scalar) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono<V>, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Mono<V>) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Number of (monomial, symbol-monomial) pairs with nonzero coefficient.
    pub fn term_count(&self) -> usize {
        self.terms.values().map(Scalar::len).sum()
    }

    pub fn add_term(&mut self, m: Mono<V>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn lambda_range(&self) -> Option<(i32, i32)> {
        let lo = self.terms.keys().map(|m| m.lambda).min()?;
        let hi = self.terms.keys().map(|m| m.lambda).max()?;
        Some((lo, hi))
    }

    pub fn variables(&self) -> Vec<V> {
        let mut v: Vec<V> = self
            .terms
            .keys()
            .flat_map(|m| m.vars.iter().map(|(x, _)| x.clone()))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn mul_scalar(&self, k: &Scalar) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn scale(&self, k: &Cq) -> Self {
        self.map_scalars(|c| c.scale(k))
    }

    pub fn map_scalars(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn subs_symbol(&self, s: Symbol, v: &Scalar) -> Self {
        self.map_scalars(|c| c.substitute(s, v))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// The part of `self` with the given `λ` power, with `λ` stripped.
    pub fn lambda_part(&self, k: i32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.lambda == k {
                out.add_term(
                    Mono {
                        lambda: 0,
                        vars: m.vars.clone(),
                    },
                    c.clone(),
                );
            }
        }
        out
    }

    /// Applies a derivation given by its action `d` on variables.
    pub fn derive<E>(&self, d: &impl Fn(&V) -> Result<Poly<V>, E>) -> Result<Self, E> {
        let mut cache: BTreeMap<V, Poly<V>> = BTreeMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (idx, (v, e)) in m.vars.iter().enumerate() {
                if !cache.contains_key(v) {
                    cache.insert(v.clone(), d(v)?);
                }
                let dv = &cache[v];
                if dv.is_zero() {
                    continue;
                }
                let rest = m.drop_one(idx);
                let k = c * &Scalar::int(*e as i64);
                for (dm, dc) in &dv.terms {
                    out.add_term(rest.mul(dm), &k * dc);
                }
            }
        }
        Ok(out)
    }

    /// Ring homomorphism sending each variable `v` to `f(v)`; `λ` and
    /// coefficients are kept.
    pub fn map_vars<W: Var, E>(&self, f: &impl Fn(&V) -> Result<Poly<W>, E>) -> Result<Poly<W>, E> {
        let mut cache: BTreeMap<V, Poly<W>> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::<W>::term(
                Mono {
                    lambda: m.lambda,
                    vars: Vec::new(),
                },
                c.clone(),
            );
            for (v, e) in &m.vars {
                if !cache.contains_key(v) {
                    cache.insert(v.clone(), f(v)?);
                }
                for _ in 0..*e {
                    acc = &acc * &cache[v];
                }
            }
            out = &out + &acc;
        }
        Ok(out)
    }
}

impl<V: Var> fmt::Display for Poly<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let mono = m.to_string();
            if mono == "1" {
                write!(f, "({c})")?;
            } else if *c == Scalar::one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "({c})*{mono}")?;
            }
        }
        Ok(())
    }
}

impl<'a, V: Var> Add<&'a Poly<V>> for &'a Poly<V> {
    type Output = Poly<V>;
    fn add(self, rhs: &'a Poly<V>) -> Poly<V> {
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a, V: Var> Sub<&'a Poly<V>> for &'a Poly<V> {
    type Output = Poly<V>;
    fn sub(self, rhs: &'a Poly<V>) -> Poly<V> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a, V: Var> Mul<&'a Poly<V>> for &'a Poly<V> {
    type Output = Poly<V>;
    fn mul(self, rhs: &'a Poly<V>) -> Poly<V> {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl<V: Var> Neg for &Poly<V> {
    type Output = Poly<V>;
    fn neg(self) -> Poly<V> {
        self.map_scalars(|c| -c)
    }
}

impl<V: Var> Add for Poly<V> {
    type Output = Poly<V>;
    fn add(self, rhs: Poly<V>) -> Poly<V> {
        &self + &rhs
    }
}

impl<V: Var> Sub for Poly<V> {
    type Output = Poly<V>;
    fn sub(self, rhs: Poly<V>) -> Poly<V> {
        &self - &rhs
    }
}

impl<V: Var> Mul for Poly<V> {
    type Output = Poly<V>;
    fn mul(self, rhs: Poly<V>) -> Poly<V> {
        &self * &rhs
    }
}

impl<V: Var> Neg for Poly<V> {
    type Output = Poly<V>;
    fn neg(self) -> Poly<V> {
        -&self
    }
}

impl<V: Var> From<Scalar> for Poly<V> {
    fn from(s: Scalar) -> Self {
        Poly::constant(s)
    }
}

impl<V: Var> Ring for Poly<V> {
    fn zero() -> Self {
        Poly::zero()
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
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
        Poly::scale(self, c)
    }
}
