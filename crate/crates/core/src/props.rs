//! Seeded randomized property suites for the symbolic engines. Each case
//! draws fresh random inputs from a ChaCha stream, so a `(seed, cases)`
//! pair reproduces a run exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffpoly::{total_dt, CNLSSystem, DiffPoly, Field, JetVar, KMatrix, Mono, Poly};
use crate::loop_algebra::{LoopElement, LoopGenerator};
use crate::scalar::{cq, rat, Scalar, Symbol};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const DEFAULT_CASES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// First failing input, rendered.
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropReport {
    pub seed: u64,
    pub outcomes: Vec<PropOutcome>,
}

impl PropReport {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().map(|o| o.failures).sum()
    }
}

fn small_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let re = rat(rng.gen_range(-4..=4), rng.gen_range(1..=3));
    let im = rat(rng.gen_range(-3..=3), 1);
    let base = Scalar::from_cq(cq(re, im));
    match rng.gen_range(0..6) {
        0 => &base * &Scalar::sym(Symbol::Epsilon),
        1 => &base + &Scalar::sym(Symbol::Kappa),
        _ => base,
    }
}

fn random_jet(rng: &mut ChaCha8Rng, allow_x: bool) -> JetVar {
    let k = rng.gen_range(1..=2);
    let field = if rng.gen_bool(0.5) {
        Field::Beta(k)
    } else {
        Field::BetaConj(k)
    };
    let x = u8::from(allow_x && rng.gen_bool(0.25));
    let t = rng.gen_range(0..=if x == 1 { 1 } else { 2 });
    JetVar::new(field, t, x)
}

fn random_poly(rng: &mut ChaCha8Rng, allow_x: bool) -> DiffPoly {
    let mut p = DiffPoly::zero();
    for _ in 0..rng.gen_range(0..=4) {
        let nvars = rng.gen_range(0..=3);
        let vars = (0..nvars).map(|_| (random_jet(rng, allow_x), 1)).collect();
        let lambda = rng.gen_range(-2..=2);
        p.add_term(Mono::from_factors(lambda, vars), small_scalar(rng));
    }
    p
}

fn random_element(rng: &mut ChaCha8Rng) -> LoopElement<Scalar> {
    let mut e = LoopElement::zero();
    for _ in 0..rng.gen_range(0..=4) {
        let g = LoopGenerator {
            l: rng.gen_range(0..3),
            m: rng.gen_range(0..3),
            n: rng.gen_range(-3..=3),
        };
        e.add_term(g, small_scalar(rng));
    }
    e
}

struct Suite {
    rng: ChaCha8Rng,
    cases: usize,
    outcomes: Vec<PropOutcome>,
}

impl Suite {
    fn new(seed: u64, cases: usize) -> Self {
        Suite {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cases,
            outcomes: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, mut case: impl FnMut(&mut ChaCha8Rng) -> Result<(), String>) {
        let mut out = PropOutcome {
            name: name.into(),
            cases: self.cases,
            failures: 0,
            first_failure: None,
        };
        for _ in 0..self.cases {
            if let Err(msg) = case(&mut self.rng) {
                out.failures += 1;
                out.first_failure.get_or_insert(msg);
            }
        }
        self.outcomes.push(out);
    }
}

fn expect_eq<T: PartialEq + std::fmt::Display>(lhs: T, rhs: T, ctx: impl FnOnce() -> String) -> Result<(), String> {
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("{}: {lhs} != {rhs}", ctx()))
    }
}

/// Leibniz rule, substitution idempotence and ring laws for differential
/// polynomials.
pub fn diffpoly_props(seed: u64, cases: usize) -> PropReport {
    let mut s = Suite::new(seed, cases);
    s.check("leibniz", |rng| {
        let (p, q) = (random_poly(rng, false), random_poly(rng, false));
        let lhs = total_dt(&(&p * &q)).map_err(|e| e.to_string())?;
        let rhs =
            &(&total_dt(&p).map_err(|e| e.to_string())? * &q) + &(&p * &total_dt(&q).map_err(|e| e.to_string())?);
        expect_eq(lhs, rhs, || format!("p = {p}, q = {q}"))
    });
    let sys = CNLSSystem::new(&KMatrix::symbolic(), Symbol::Epsilon.into());
    s.check("substitution_idempotent", |rng| {
        let p = random_poly(rng, true);
        let once = sys.substitute(&p).map_err(|e| e.to_string())?;
        if once.variables().iter().any(|v| v.x > 0) {
            return Err(format!("x-jet survives in {once}"));
        }
        let twice = sys.substitute(&once).map_err(|e| e.to_string())?;
        expect_eq(once, twice, || format!("p = {p}"))
    });
    s.check("ring_associative", |rng| {
        let (p, q, r) = (random_poly(rng, true), random_poly(rng, true), random_poly(rng, true));
        expect_eq(&(&p * &q) * &r, &p * &(&q * &r), || {
            format!("p = {p}, q = {q}, r = {r}")
        })?;
        expect_eq(&(&p + &q) + &r, &p + &(&q + &r), || "addition".into())
    });
    s.check("ring_commutative", |rng| {
        let (p, q) = (random_poly(rng, true), random_poly(rng, true));
        expect_eq(&p * &q, &q * &p, || format!("p = {p}, q = {q}"))?;
        expect_eq(&p + &q, &q + &p, || "addition".into())
    });
    s.check("ring_distributive", |rng| {
        let (p, q, r) = (random_poly(rng, true), random_poly(rng, true), random_poly(rng, true));
        expect_eq(&p * &(&q + &r), &(&p * &q) + &(&p * &r), || {
            format!("p = {p}, q = {q}, r = {r}")
        })
    });
    #[allow(clippy::eq_op)]
    s.check("ring_identities", |rng| {
        let p = random_poly(rng, true);
        expect_eq(&p * &Poly::one(), p.clone(), || "one".into())?;
        expect_eq(&p - &p, DiffPoly::zero(), || "inverse".into())
    });
    PropReport {
        seed,
        outcomes: s.outcomes,
    }
}

/// Antisymmetry and bilinearity of the bracket, plus Jacobi.
pub fn loop_algebra_props(seed: u64, cases: usize) -> PropReport {
    let mut s = Suite::new(seed, cases);
    s.check("antisymmetry", |rng| {
        let (a, b) = (random_element(rng), random_element(rng));
        expect_eq(a.bracket(&b), b.bracket(&a).neg(), || format!("a = {a}, b = {b}"))
    });
    s.check("bilinearity", |rng| {
        let (a, b, c) = (random_element(rng), random_element(rng), random_element(rng));
        let k = small_scalar(rng);
        let left = a.mul_coeff(&k).add(&b).bracket(&c);
        expect_eq(left, a.bracket(&c).mul_coeff(&k).add(&b.bracket(&c)), || {
            format!("left slot, k = {k}")
        })?;
        let right = c.bracket(&a.mul_coeff(&k).add(&b));
        expect_eq(right, c.bracket(&a).mul_coeff(&k).add(&c.bracket(&b)), || {
            format!("right slot, k = {k}")
        })
    });
    s.check("jacobi", |rng| {
        let (a, b, c) = (random_element(rng), random_element(rng), random_element(rng));
        let j = a
            .bracket(&b.bracket(&c))
            .add(&b.bracket(&c.bracket(&a)))
            .add(&c.bracket(&a.bracket(&b)));
        expect_eq(j, LoopElement::zero(), || format!("a = {a}, b = {b}, c = {c}"))
    });
    PropReport {
        seed,
        outcomes: s.outcomes,
    }
}
