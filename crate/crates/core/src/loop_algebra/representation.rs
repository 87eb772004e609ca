//! Truncated action of the generators on fibre jet coordinates
//! `ξ_a^(k)`, `a ∈ {0,1,2}`, `|k| ≤ N`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{bracket_generators, AlgebraError, LoopElement, LoopGenerator};
use crate::scalar::{cq_i, Cq, Scalar};

/// Linear vector field `Σ (Aξ)_r ∂/∂ξ_r`, stored as its matrix `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetOperator {
    n: usize,
    rows: Vec<BTreeMap<usize, Scalar>>,
}

impl JetOperator {
    pub fn zero(n: usize) -> Self {
        JetOperator {
            n,
            rows: vec![BTreeMap::new(); 3 * (2 * n + 1)],
        }
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn width(&self) -> usize {
        2 * self.n + 1
    }

    /// Row/column index of `ξ_a^(k)`, if inside the truncation.
    pub fn index(&self, a: u8, k: i64) -> Option<usize> {
        (k.unsigned_abs() as usize <= self.n).then(|| a as usize * self.width() + (k + self.n as i64) as usize)
    }

    /// `(a, k)` for a row index.
    pub fn coordinate(&self, idx: usize) -> (u8, i64) {
        ((idx / self.width()) as u8, (idx % self.width()) as i64 - self.n as i64)
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.rows[r].get(&c).cloned().unwrap_or_default()
    }

    fn add_entry(&mut self, r: usize, c: usize, v: &Scalar) {
        let e = self.rows[r].entry(c).or_default();
        *e += v;
        if e.is_zero() {
            self.rows[r].remove(&c);
        }
    }

    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, c, v) in other.nonzero_entries() {
            out.add_entry(r, c, v);
        }
        out
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        let mut out = JetOperator::zero(self.n);
        for (r, c, v) in self.nonzero_entries() {
            out.add_entry(r, c, &(v * k));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = JetOperator::zero(self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for (k, a) in row {
                for (c, b) in &other.rows[*k] {
                    out.add_entry(r, *c, &(a * b));
                }
            }
        }
        out
    }

    /// Matrix commutator `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self).scale(&Scalar::int(-1)))
    }

    /// Equality of all rows `(a, k)` with `|k| ≤ bound`.
    pub fn eq_on_interior(&self, other: &Self, bound: usize) -> bool {
        (0..self.dim()).all(|r| {
            let (_, k) = self.coordinate(r);
            k.unsigned_abs() as usize > bound || self.rows[r] == other.rows[r]
        })
    }

    pub fn is_zero_on_interior(&self, bound: usize) -> bool {
        self.eq_on_interior(&JetOperator::zero(self.n), bound)
    }
}

impl fmt::Display for JetOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, c, v) in self.nonzero_entries() {
            let (a, k) = self.coordinate(r);
            let (b, j) = self.coordinate(c);
            writeln!(f, "d/dxi_{a}^({k}) <- ({v}) xi_{b}^({j})")?;
        }
        Ok(())
    }
}

/// `T_lm^(h) = −i Σ_k ξ_l^(h+k) ∂/∂ξ_m^(k) + i δ_lm Σ_k ξ_0^(h+k) ∂/∂ξ_0^(k)`,
/// with terms leaving the truncation dropped.
pub fn represent(g: &LoopGenerator, n: usize) -> Result<JetOperator, AlgebraError> {
    let h = g.n as i64;
    if n < 1 || (n as i64) < h.abs() + 1 {
        return Err(AlgebraError::TruncationTooSmall { n, mode: g.n });
    }
    let mut op = JetOperator::zero(n);
    let mi = Scalar::from_cq(-cq_i());
    let pi = Scalar::from_cq(cq_i());
    for k in -(n as i64)..=(n as i64) {
        let (Some(row), Some(col)) = (op.index(g.m, k), op.index(g.l, h + k)) else {
            continue;
        };
        op.add_entry(row, col, &mi);
        if g.l == g.m {
            let (r0, c0) = (op.index(0, k).unwrap(), op.index(0, h + k).unwrap());
            op.add_entry(r0, c0, &pi);
        }
    }
    Ok(op)
}

pub fn represent_element(e: &LoopElement<Scalar>, n: usize) -> Result<JetOperator, AlgebraError> {
    let mut op = JetOperator::zero(n);
    for (g, c) in e.terms() {
        op = op.add(&represent(g, n)?.scale(c));
    }
    Ok(op)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub a: LoopGenerator,
    pub b: LoopGenerator,
    /// True when both generators have all indices in `{1, 2}`.
    pub core: bool,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RepresentationReport {
    pub truncation: usize,
    pub max_mode: i32,
    /// Global sign `s` with `[ρ(a), ρ(b)] = s·ρ([a,b])` on interior rows.
    pub sign: i8,
    pub pairs_checked: usize,
    pub core_pairs: usize,
    pub core_matches: usize,
    pub other_pairs: usize,
    pub other_matches: usize,
    pub mismatches: Vec<PairCheck>,
}

impl RepresentationReport {
    pub fn core_consistent(&self) -> bool {
        self.core_pairs == self.core_matches
    }
}

fn bracket_element(a: LoopGenerator, b: LoopGenerator) -> LoopElement<Scalar> {
    let mut e = LoopElement::zero();
    for (c, g) in bracket_generators(a, b) {
        e.add_term(g, Scalar::from_cq(c));
    }
    e
}

/// Compares operator commutators with the image of the algebra bracket over
/// every generator pair with `|h| ≤ (N−1)/2`. The sign is fixed by the first
/// core pair with a nonzero commutator and then held for every pair.
pub fn check_representation(n: usize) -> Result<RepresentationReport, AlgebraError> {
    if n < 1 {
        return Err(AlgebraError::TruncationTooSmall { n, mode: 0 });
    }
    let max_mode = ((n - 1) / 2) as i32;
    let gens = LoopGenerator::window(max_mode);
    let reps: Vec<JetOperator> = gens.iter().map(|g| represent(g, n)).collect::<Result<_, _>>()?;
    let is_core = |g: &LoopGenerator| g.l != 0 && g.m != 0;

    struct Raw {
        a: LoopGenerator,
        b: LoopGenerator,
        core: bool,
        comm: JetOperator,
        image: JetOperator,
        bound: usize,
    }
    let mut raw = Vec::new();
    for (i, a) in gens.iter().enumerate() {
        for (j, b) in gens.iter().enumerate() {
            let bound = n - (a.n.unsigned_abs() + b.n.unsigned_abs()) as usize;
            raw.push(Raw {
                a: *a,
                b: *b,
                core: is_core(a) && is_core(b),
                comm: reps[i].commutator(&reps[j]),
                image: represent_element(&bracket_element(*a, *b), n)?,
                bound,
            });
        }
    }
    let neg = Scalar::int(-1);
    let sign_of = |r: &Raw| -> Option<i8> {
        if r.comm.is_zero_on_interior(r.bound) {
            return None;
        }
        if r.comm.eq_on_interior(&r.image, r.bound) {
            Some(1)
        } else if r.comm.eq_on_interior(&r.image.scale(&neg), r.bound) {
            Some(-1)
        } else {
            None
        }
    };
    let sign = raw
        .iter()
        .filter(|r| r.core)
        .find_map(sign_of)
        .or_else(|| raw.iter().find_map(sign_of))
        .unwrap_or(1);
    let s = Scalar::from_cq(Cq::from(crate::scalar::cq_int(sign as i64)));

    let mut report = RepresentationReport {
        truncation: n,
        max_mode,
        sign,
        pairs_checked: raw.len(),
        core_pairs: 0,
        core_matches: 0,
        other_pairs: 0,
        other_matches: 0,
        mismatches: Vec::new(),
    };
    for r in &raw {
        let ok = r.comm.eq_on_interior(&r.image.scale(&s), r.bound);
        if r.core {
            report.core_pairs += 1;
            report.core_matches += ok as usize;
        } else {
            report.other_pairs += 1;
            report.other_matches += ok as usize;
        }
        if !ok {
            report.mismatches.push(PairCheck {
                a: r.a,
                b: r.b,
                core: r.core,
                matches: false,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loop_algebra::gen;

    #[test]
    fn t00_acts_only_on_xi0_block() {
        // The two sums cancel for l = m = 0, so the block is empty as well.
        let op = represent(&gen(0, 0, 0), 1).unwrap();
        assert_eq!(op.nonzero_entries().count(), 0);
        let op = represent(&gen(1, 1, 0), 1).unwrap();
        let blocks: Vec<(u8, u8)> = op
            .nonzero_entries()
            .map(|(r, c, _)| (op.coordinate(r).0, op.coordinate(c).0))
            .collect();
        assert!(blocks.contains(&(0, 0)) && blocks.contains(&(1, 1)));
        for (r, c, _) in represent(&gen(0, 0, 0), 1).unwrap().nonzero_entries() {
            assert_eq!(op.coordinate(r).0, 0);
            assert_eq!(op.coordinate(c).0, 0);
        }
    }

    #[test]
    fn truncation_guard() {
        assert!(matches!(
            represent(&gen(1, 2, 2), 2),
            Err(AlgebraError::TruncationTooSmall { n: 2, mode: 2 })
        ));
        assert!(represent(&gen(1, 2, 2), 3).is_ok());
    }

    #[test]
    fn off_diagonal_pair_matches_with_negative_sign() {
        let (a, b) = (gen(0, 1, 0), gen(1, 0, 0));
        let n = 3;
        let comm = represent(&a, n).unwrap().commutator(&represent(&b, n).unwrap());
        let img = represent_element(&bracket_element(a, b), n).unwrap();
        assert!(comm.eq_on_interior(&img.scale(&Scalar::int(-1)), n));
        assert!(!comm.eq_on_interior(&img, n));
    }

    #[test]
    fn self_pair_commutes() {
        let op = represent(&gen(2, 1, 1), 3).unwrap();
        assert!(op.commutator(&op).is_zero_on_interior(3));
    }
}
