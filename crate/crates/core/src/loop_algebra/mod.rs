//! Sparse exact arithmetic in the loop algebra spanned by `T_lm^(n)`,
//! `l, m ∈ {0,1,2}`, `n ∈ ℤ`, with bracket
//!
//! `[T_lm^(n), T_ab^(k)] = i δ_bl T_am^(n+k) − i δ_ma T_lb^(n+k)`.
//!
//! Elements are generic over their coefficient ring so the same code serves
//! exact [`Scalar`]s and differential polynomials.

mod known;
mod mapping;
mod relations;
mod representation;

pub use known::{ConstantsMapNote, KnownDiscrepancies, KnownDiscrepancy, WhitelistCheck};
pub use mapping::{
    evaluate_word, kernel_member, BracketWord, Chi, Combination, ImageTerm, MappingTable, ModeExpr, WordError,
};
pub use relations::{
    check_relations, default_candidates, load_relations, parse_relations, search_conventions, standard_relations,
    ClassCounts, Classification, ConsistencyEntry, Relation, RelationOutcome, RelationReport, SearchResult,
    StructuralConflict, TlmCheck, DEFAULT_CANDIDATES,
};
pub use representation::{
    check_representation, represent, represent_element, JetOperator, PairCheck, RepresentationReport,
};

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(test)]
use crate::scalar::cq_int;
use crate::scalar::{cq_i, Cq, Ring, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("generator index ({l},{m}) out of range 0..=2")]
    IndexOutOfRange { l: u8, m: u8 },
    #[error("unassigned generator symbol {0}")]
    Unassigned(Chi),
    #[error("truncation N={n} too small for mode {mode} (need N >= |mode| + 1)")]
    TruncationTooSmall { n: usize, mode: i32 },
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("relation data: {0}")]
    Data(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LoopGenerator {
    pub l: u8,
    pub m: u8,
    pub n: i32,
}

impl LoopGenerator {
    pub fn new(l: u8, m: u8, n: i32) -> Result<Self, AlgebraError> {
        if l > 2 || m > 2 {
            return Err(AlgebraError::IndexOutOfRange { l, m });
        }
        Ok(LoopGenerator { l, m, n })
    }

    /// All generators with `|n| ≤ max_mode`, in canonical order.
    pub fn window(max_mode: i32) -> Vec<LoopGenerator> {
        let mut v = Vec::new();
        for l in 0..3 {
            for m in 0..3 {
                for n in -max_mode..=max_mode {
                    v.push(LoopGenerator { l, m, n });
                }
            }
        }
        v
    }
}

impl fmt::Display for LoopGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}{}^({})", self.l, self.m, self.n)
    }
}

/// Bracket of two generators as at most two signed terms.
pub fn bracket_generators(a: LoopGenerator, b: LoopGenerator) -> Vec<(Cq, LoopGenerator)> {
    let n = a.n + b.n;
    let mut out = Vec::with_capacity(2);
    if b.m == a.l {
        out.push((cq_i(), LoopGenerator { l: b.l, m: a.m, n }));
    }
    if a.m == b.l {
        out.push((-cq_i(), LoopGenerator { l: a.l, m: b.m, n }));
    }
    if out.len() == 2 && out[0].1 == out[1].1 {
        out.clear();
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopElement<C: Ring = Scalar> {
    terms: BTreeMap<LoopGenerator, C>,
}

impl<C: Ring> Default for LoopElement<C> {
    fn default() -> Self {
        LoopElement { terms: BTreeMap::new() }
    }
}

impl<C: Ring> LoopElement<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(g: LoopGenerator, c: C) -> Self {
        let mut e = Self::zero();
        e.add_term(g, c);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LoopGenerator, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, g: &LoopGenerator) -> Option<&C> {
        self.terms.get(g)
    }

    pub fn support(&self) -> Vec<LoopGenerator> {
        self.terms.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, g: LoopGenerator, c: C) {
        if c.is_zero() {
            return;
        }
        if let Some(old) = self.terms.get_mut(&g) {
            *old = old.add(&c);
            if old.is_zero() {
                self.terms.remove(&g);
            }
        } else {
            self.terms.insert(g, c);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(*g, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, c: &Cq) -> Self {
        self.map(|v| v.scale(c))
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        self.map(|v| v.mul(k))
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero();
        for (g, c) in &self.terms {
            out.add_term(*g, f(c));
        }
        out
    }

    pub fn map_into<D: Ring>(&self, f: impl Fn(&C) -> D) -> LoopElement<D> {
        let mut out = LoopElement::zero();
        for (g, c) in &self.terms {
            out.add_term(*g, f(c));
        }
        out
    }

    /// Linear substitution of generators: each `g` is replaced by `f(g)`.
    pub fn substitute_generators(&self, f: impl Fn(&LoopGenerator) -> LoopElement<Scalar>) -> Self
    where
        C: From<Scalar>,
    {
        let mut out = Self::zero();
        for (g, c) in &self.terms {
            for (h, k) in f(g).terms() {
                out.add_term(*h, c.mul(&C::from(k.clone())));
            }
        }
        out
    }

    pub fn bracket(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ga, ca) in &self.terms {
            for (gb, cb) in &other.terms {
                let bracketed = bracket_generators(*ga, *gb);
                if bracketed.is_empty() {
                    continue;
                }
                let prod = ca.mul(cb);
                for (sign, g) in bracketed {
                    out.add_term(g, prod.scale(&sign));
                }
            }
        }
        out
    }
}

impl<C: Ring> fmt::Display for LoopElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (g, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})*{g}")?;
        }
        Ok(())
    }
}

impl<C: Ring> Serialize for LoopElement<C> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (g, c) in &self.terms {
            seq.serialize_element(&(g.l, g.m, g.n, c.to_string()))?;
        }
        seq.end()
    }
}

pub fn gen(l: u8, m: u8, n: i32) -> LoopGenerator {
    LoopGenerator::new(l, m, n).expect("generator index in range")
}

/// Shorthand for a single generator with unit coefficient.
pub fn unit(l: u8, m: u8, n: i32) -> LoopElement<Scalar> {
    LoopElement::term(gen(l, m, n), Scalar::one())
}

pub fn bracket<C: Ring>(a: &LoopElement<C>, b: &LoopElement<C>) -> LoopElement<C> {
    a.bracket(b)
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobiViolation {
    pub triple: [LoopGenerator; 3],
    pub residual: LoopElement<Scalar>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobiReport {
    pub max_mode: i32,
    pub generators: usize,
    pub triples: u64,
    /// Largest `|coefficient|²` over all residuals, exact.
    pub max_residual: Scalar,
    pub violations: Vec<JacobiViolation>,
}

fn jacobi_sum(a: LoopGenerator, b: LoopGenerator, c: LoopGenerator) -> LoopElement<Scalar> {
    let (x, y, z) = (
        LoopElement::term(a, Scalar::one()),
        LoopElement::term(b, Scalar::one()),
        LoopElement::term(c, Scalar::one()),
    );
    x.bracket(&y)
        .bracket(&z)
        .add(&y.bracket(&z).bracket(&x))
        .add(&z.bracket(&x).bracket(&y))
}

/// Exhaustive exact Jacobi check over every ordered generator triple with
/// `|n| ≤ max_mode`.
pub fn jacobi_scan(max_mode: i32) -> JacobiReport {
    let gens = LoopGenerator::window(max_mode.max(0));
    let violations: Vec<JacobiViolation> = gens
        .par_iter()
        .flat_map_iter(|&a| {
            let gens = &gens;
            gens.iter().flat_map(move |&b| {
                gens.iter().filter_map(move |&c| {
                    let r = jacobi_sum(a, b, c);
                    (!r.is_zero()).then(|| JacobiViolation {
                        triple: [a, b, c],
                        residual: r,
                    })
                })
            })
        })
        .collect();
    let mut max_residual = num_rational::BigRational::from_integer(0.into());
    for v in &violations {
        for (_, c) in v.residual.terms() {
            for (_, k) in c.terms() {
                let n2 = &k.re * &k.re + &k.im * &k.im;
                if n2 > max_residual {
                    max_residual = n2;
                }
            }
        }
    }
    let g = gens.len() as u64;
    JacobiReport {
        max_mode,
        generators: gens.len(),
        triples: g * g * g,
        max_residual: Scalar::from_cq(Cq::new(max_residual, num_traits::Zero::zero())),
        violations,
    }
}

/// Image of a generator under the fibre-coordinate vector field, written back
/// in algebra coordinates: `T_lm^(h) ↦ −T_lm^(−h) + δ_lm T_00^(−h)`.
///
/// This is the abstract counterpart of [`represent`]: it is a
/// homomorphism on the span of generators with both indices in `{1,2}` and
/// only there (a `T_00` loses its image entirely).
pub fn fiber_image(g: &LoopGenerator) -> LoopElement<Scalar> {
    let mut out = LoopElement::term(LoopGenerator { n: -g.n, ..*g }, Scalar::int(-1));
    if g.l == g.m {
        out.add_term(LoopGenerator { l: 0, m: 0, n: -g.n }, Scalar::one());
    }
    out
}

pub fn fiber_map<C: Ring + From<Scalar>>(e: &LoopElement<C>) -> LoopElement<C> {
    e.substitute_generators(fiber_image)
}
