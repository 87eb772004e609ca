use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mapping::{BracketWord, Chi, Combination, MappingTable};
use super::{AlgebraError, LoopElement};
use crate::linsolve::{solve_affine, AffineRow, AffineSolution};
use crate::scalar::{cq_int, fmt_cq, Cq, Scalar, SymMonomial, Symbol};

const STANDARD_RELATIONS: &str = include_str!("../../data/relations.jsonl");

/// Parameters that relations may carry on their right-hand sides.
const PARAMETERS: [Symbol; 2] = [Symbol::Mu, Symbol::Kappa];

/// Prefactor candidates used when none are supplied.
pub const DEFAULT_CANDIDATES: [&str; 12] = ["1", "-1", "i", "-i", "1/2", "-1/2", "2", "-2", "3", "-3", "3*i", "-3*i"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub tag: String,
    #[serde(default)]
    pub text: String,
    pub lhs: Combination,
    #[serde(default)]
    pub rhs: Vec<(Scalar, Chi)>,
}

impl Relation {
    pub fn symbols(&self) -> Vec<Chi> {
        let mut v: Vec<Chi> = self.lhs.iter().flat_map(|(_, w)| w.leaves()).collect();
        v.extend(self.rhs.iter().map(|(_, c)| *c));
        v.extend(self.rhs.iter().map(|(_, c)| c.swapped()));
        v.sort();
        v.dedup();
        v
    }

    fn rhs_image(&self, map: &MappingTable, swap: bool) -> Result<LoopElement<Scalar>, AlgebraError> {
        let mut out = LoopElement::zero();
        for (c, chi) in &self.rhs {
            let chi = if swap { chi.swapped() } else { *chi };
            out = out.add(&map.image(chi)?.mul_coeff(c));
        }
        Ok(out)
    }

    /// `image(lhs) − image(rhs)`, optionally with the rhs indices swapped.
    pub fn residual(&self, map: &MappingTable, swap: bool) -> Result<LoopElement<Scalar>, AlgebraError> {
        Ok(map.evaluate_combination(&self.lhs)?.sub(&self.rhs_image(map, swap)?))
    }
}

pub fn parse_relations(text: &str) -> Result<Vec<Relation>, AlgebraError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rel: Relation =
            serde_json::from_str(line).map_err(|e| AlgebraError::Data(format!("line {}: {e}", k + 1)))?;
        out.push(rel);
    }
    Ok(out)
}

pub fn load_relations(path: &Path) -> Result<Vec<Relation>, AlgebraError> {
    let text = std::fs::read_to_string(path).map_err(|e| AlgebraError::Data(format!("{}: {e}", path.display())))?;
    parse_relations(&text)
}

/// The bundled relation list.
pub fn standard_relations() -> Vec<Relation> {
    parse_relations(STANDARD_RELATIONS).expect("bundled relation list parses")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    Exact,
    ExactWithParameters { values: BTreeMap<Symbol, String> },
    HoldsAfterRhsSwap { values: BTreeMap<Symbol, String> },
    Fails,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Exact => "exact",
            Classification::ExactWithParameters { .. } => "exact_with_parameters",
            Classification::HoldsAfterRhsSwap { .. } => "holds_after_rhs_swap",
            Classification::Fails => "fails",
        }
    }

    pub fn passes(&self) -> bool {
        matches!(self, Classification::Exact | Classification::ExactWithParameters { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationOutcome {
    pub tag: String,
    pub text: String,
    #[serde(flatten)]
    pub classification: Classification,
    /// Residual of the relation as written (no parameter substitution).
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyEntry {
    pub symbol: Symbol,
    /// Inferred value → tags that produced it.
    pub values: BTreeMap<String, Vec<String>>,
    pub consistent: bool,
}

/// Two relations that cannot both hold for a nonzero parameter, found by
/// abstract rewriting before any homomorphism is applied.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuralConflict {
    pub vanishing: String,
    pub affected: String,
    pub forces: BTreeMap<Symbol, String>,
    pub note: String,
}

/// Comparison of `t_lm = [χ_l, χ_m]` with the row `t_lm → i T_lm^(0)`
/// wherever both indices lie in `{1, 2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TlmCheck {
    pub l: u8,
    pub m: u8,
    pub derived: String,
    pub printed: String,
    pub agrees: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClassCounts {
    pub exact: usize,
    pub exact_with_parameters: usize,
    pub holds_after_rhs_swap: usize,
    pub fails: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationReport {
    pub n: i32,
    pub l: i32,
    pub prefactors: Vec<String>,
    pub counts: ClassCounts,
    pub outcomes: Vec<RelationOutcome>,
    pub consistency: Vec<ConsistencyEntry>,
    pub structural_conflicts: Vec<StructuralConflict>,
    pub tlm_checks: Vec<TlmCheck>,
}

impl RelationReport {
    pub fn outcome(&self, tag: &str) -> Option<&RelationOutcome> {
        self.outcomes.iter().find(|o| o.tag == tag)
    }

    pub fn passing(&self) -> usize {
        self.counts.exact + self.counts.exact_with_parameters
    }
}

enum Inference {
    Zero,
    Solved(BTreeMap<Symbol, Cq>),
    NoSolution,
}

/// Finds the unique values of `μ`, `κ` making `residual` vanish, when the
/// residual is affine in them.
fn infer(residual: &LoopElement<Scalar>) -> Inference {
    if residual.is_zero() {
        return Inference::Zero;
    }
    let present: Vec<Symbol> = PARAMETERS
        .iter()
        .copied()
        .filter(|p| residual.terms().any(|(_, c)| c.mentions(*p)))
        .collect();
    if present.is_empty() {
        return Inference::NoSolution;
    }
    let mut rows: BTreeMap<(super::LoopGenerator, SymMonomial), AffineRow> = BTreeMap::new();
    for (g, c) in residual.terms() {
        for (mono, coeff) in c.terms() {
            let mut rest = mono.clone();
            let mut slot = None;
            for (k, p) in present.iter().enumerate() {
                let (e, r) = rest.split_off(*p);
                rest = r;
                match e {
                    0 => {}
                    1 if slot.is_none() => slot = Some(k),
                    _ => return Inference::NoSolution,
                }
            }
            let row = rows.entry((*g, rest)).or_insert_with(|| AffineRow {
                coeffs: vec![cq_int(0); present.len()],
                constant: cq_int(0),
            });
            match slot {
                Some(k) => row.coeffs[k] += coeff.clone(),
                None => row.constant += coeff.clone(),
            }
        }
    }
    let rows: Vec<AffineRow> = rows.into_values().collect();
    match solve_affine(&rows, present.len()) {
        AffineSolution::Unique(x) => Inference::Solved(present.into_iter().zip(x).collect()),
        _ => Inference::NoSolution,
    }
}

fn values_map(v: &BTreeMap<Symbol, Cq>) -> BTreeMap<Symbol, String> {
    v.iter().map(|(s, c)| (*s, fmt_cq(c))).collect()
}

fn classify(map: &MappingTable, rel: &Relation) -> Result<(Classification, LoopElement<Scalar>), AlgebraError> {
    let direct = rel.residual(map, false)?;
    let class = match infer(&direct) {
        Inference::Zero => Classification::Exact,
        Inference::Solved(v) => Classification::ExactWithParameters { values: values_map(&v) },
        Inference::NoSolution => match infer(&rel.residual(map, true)?) {
            Inference::Zero => Classification::HoldsAfterRhsSwap {
                values: BTreeMap::new(),
            },
            Inference::Solved(v) => Classification::HoldsAfterRhsSwap { values: values_map(&v) },
            Inference::NoSolution => Classification::Fails,
        },
    };
    Ok((class, direct))
}

fn word_contains(w: &BracketWord, target: &BracketWord) -> bool {
    if w == target {
        return true;
    }
    match w {
        BracketWord::Leaf(_) => false,
        BracketWord::Bracket(a, b) => word_contains(a, target) || word_contains(b, target),
    }
}

/// Uses each relation of the form `[u,v] = 0` to kill any word containing
/// `[u,v]` or `[v,u]` elsewhere, and reports what the rewritten relation
/// then forces on the parameters.
fn structural_conflicts(rels: &[Relation]) -> Vec<StructuralConflict> {
    let mut out = Vec::new();
    for a in rels {
        let [(_, w)] = a.lhs.as_slice() else { continue };
        if !a.rhs.is_empty() {
            continue;
        }
        let BracketWord::Bracket(u, v) = w else { continue };
        let rev = BracketWord::Bracket(v.clone(), u.clone());
        for b in rels {
            if b.tag == a.tag || b.rhs.is_empty() {
                continue;
            }
            if !b
                .lhs
                .iter()
                .all(|(_, bw)| word_contains(bw, w) || word_contains(bw, &rev))
            {
                continue;
            }
            // lhs of b vanishes, so every rhs coefficient must vanish.
            let mut forces = BTreeMap::new();
            for (c, _) in &b.rhs {
                let elem = LoopElement::term(super::gen(0, 0, 0), c.clone());
                if let Inference::Solved(v) = infer(&elem) {
                    forces.extend(values_map(&v));
                }
            }
            let note = forces
                .keys()
                .map(|s| format!("mutually incompatible for {s} != 0"))
                .collect::<Vec<_>>()
                .join("; ");
            out.push(StructuralConflict {
                vanishing: a.tag.clone(),
                affected: b.tag.clone(),
                forces,
                note,
            });
        }
    }
    out
}

fn tlm_checks(map: &MappingTable) -> Vec<TlmCheck> {
    let mut out = Vec::new();
    for l in 1..=2u8 {
        for m in 1..=2u8 {
            let w = BracketWord::br(BracketWord::leaf(l), BracketWord::leaf(m));
            let Ok(derived) = map.evaluate(&w) else { continue };
            let printed = LoopElement::term(super::gen(l, m, 0), Scalar::i());
            out.push(TlmCheck {
                l,
                m,
                agrees: derived == printed,
                derived: derived.to_string(),
                printed: printed.to_string(),
            });
        }
    }
    out
}

fn consistency(outcomes: &[RelationOutcome]) -> Vec<ConsistencyEntry> {
    let mut by_sym: BTreeMap<Symbol, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for o in outcomes {
        let values = match &o.classification {
            Classification::ExactWithParameters { values } | Classification::HoldsAfterRhsSwap { values } => values,
            _ => continue,
        };
        for (s, v) in values {
            by_sym
                .entry(*s)
                .or_default()
                .entry(v.clone())
                .or_default()
                .push(o.tag.clone());
        }
    }
    by_sym
        .into_iter()
        .map(|(symbol, values)| ConsistencyEntry {
            symbol,
            consistent: values.len() == 1,
            values,
        })
        .collect()
}

pub fn check_relations(map: &MappingTable, rels: &[Relation]) -> Result<RelationReport, AlgebraError> {
    let mut outcomes = rels
        .par_iter()
        .map(|rel| {
            let (classification, residual) = classify(map, rel)?;
            Ok(RelationOutcome {
                tag: rel.tag.clone(),
                text: rel.text.clone(),
                classification,
                residual: residual.to_string(),
            })
        })
        .collect::<Result<Vec<_>, AlgebraError>>()?;
    outcomes.sort_by(|a, b| a.tag.cmp(&b.tag));
    let mut counts = ClassCounts::default();
    for o in &outcomes {
        match o.classification {
            Classification::Exact => counts.exact += 1,
            Classification::ExactWithParameters { .. } => counts.exact_with_parameters += 1,
            Classification::HoldsAfterRhsSwap { .. } => counts.holds_after_rhs_swap += 1,
            Classification::Fails => counts.fails += 1,
        }
    }
    Ok(RelationReport {
        n: map.n,
        l: map.l,
        prefactors: map.prefactors.iter().map(|p| p.to_string()).collect(),
        counts,
        consistency: consistency(&outcomes),
        outcomes,
        structural_conflicts: structural_conflicts(rels),
        tlm_checks: tlm_checks(map),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub best: MappingTable,
    pub score: usize,
    pub tables_examined: u64,
    pub report: RelationReport,
}

/// Precomputed unit-prefactor images of one relation. Brackets are
/// multilinear, so a prefactor table only rescales these pieces.
struct Pieces {
    lhs: Vec<(Vec<usize>, LoopElement<Scalar>)>,
    rhs: Vec<(usize, LoopElement<Scalar>)>,
    symbols: Vec<usize>,
}

fn pieces(base: &MappingTable, rel: &Relation) -> Result<Pieces, AlgebraError> {
    let mut lhs = Vec::new();
    for (c, w) in &rel.lhs {
        let leaves: Vec<usize> = w.leaves().iter().map(|x| (x.index() - 1) as usize).collect();
        lhs.push((leaves, base.evaluate(w)?.mul_coeff(c)));
    }
    let mut rhs = Vec::new();
    for (c, chi) in &rel.rhs {
        rhs.push(((chi.index() - 1) as usize, base.image(*chi)?.mul_coeff(c)));
    }
    let mut symbols: Vec<usize> = lhs
        .iter()
        .flat_map(|(l, _)| l.clone())
        .chain(rhs.iter().map(|(k, _)| *k))
        .collect();
    symbols.sort();
    symbols.dedup();
    Ok(Pieces { lhs, rhs, symbols })
}

fn passes_with(p: &Pieces, pref: &[Scalar; 6]) -> bool {
    let mut r = LoopElement::zero();
    for (leaves, img) in &p.lhs {
        let mut k = Scalar::one();
        for &i in leaves {
            k = &k * &pref[i];
        }
        r = r.add(&img.mul_coeff(&k));
    }
    for (i, img) in &p.rhs {
        r = r.sub(&img.mul_coeff(&pref[*i]));
    }
    !matches!(infer(&r), Inference::NoSolution)
}

/// Exhaustive search over per-generator prefactors. The score counts
/// relations that are exact or exact with inferred parameters; ties go to
/// the lexicographically first prefactor tuple in candidate order.
pub fn search_conventions(
    base: &MappingTable,
    rels: &[Relation],
    candidates: &[Scalar],
) -> Result<SearchResult, AlgebraError> {
    if candidates.is_empty() {
        return Err(AlgebraError::EmptyCandidates);
    }
    let base_unit = base.with_prefactors(std::array::from_fn(|_| Scalar::one()));
    let k = candidates.len();
    // pass[r][code]: relation r passes when its symbols take the candidate
    // indices encoded (base k) in `code`.
    let tables: Vec<(Vec<usize>, Vec<bool>)> = rels
        .par_iter()
        .map(|rel| {
            let p = pieces(&base_unit, rel)?;
            let width = p.symbols.len();
            let total = k.pow(width as u32);
            let mut pass = Vec::with_capacity(total);
            for code in 0..total {
                let mut pref: [Scalar; 6] = std::array::from_fn(|_| Scalar::one());
                let mut c = code;
                for &s in p.symbols.iter().rev() {
                    pref[s] = candidates[c % k].clone();
                    c /= k;
                }
                pass.push(passes_with(&p, &pref));
            }
            Ok((p.symbols, pass))
        })
        .collect::<Result<_, AlgebraError>>()?;

    let total = (k as u64).pow(6);
    let (best_code, best_score) = (0..total)
        .into_par_iter()
        .map(|code| {
            let mut digits = [0usize; 6];
            let mut c = code;
            for d in digits.iter_mut().rev() {
                *d = (c % k as u64) as usize;
                c /= k as u64;
            }
            let score = tables
                .iter()
                .filter(|(syms, pass)| {
                    let idx = syms.iter().fold(0usize, |acc, &s| acc * k + digits[s]);
                    pass[idx]
                })
                .count();
            (code, score)
        })
        .reduce(
            || (u64::MAX, 0),
            |a, b| {
                if a.0 == u64::MAX {
                    return b;
                }
                if b.0 == u64::MAX {
                    return a;
                }
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let mut digits = [0usize; 6];
    let mut c = best_code;
    for d in digits.iter_mut().rev() {
        *d = (c % k as u64) as usize;
        c /= k as u64;
    }
    let best = base.with_prefactors(std::array::from_fn(|i| candidates[digits[i]].clone()));
    let report = check_relations(&best, rels)?;
    Ok(SearchResult {
        best,
        score: best_score,
        tables_examined: total,
        report,
    })
}

pub fn default_candidates() -> Vec<Scalar> {
    DEFAULT_CANDIDATES
        .iter()
        .map(|s| s.parse().expect("candidate parses"))
        .collect()
}
