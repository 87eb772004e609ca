use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lax::{symbolic_lax, Family, LaxPair};
use super::ZeroCurvatureError;
use crate::diffpoly::{CNLSSystem, MatrixDP};
use crate::linsolve::{solve_affine, AffineRow, AffineSolution};
use crate::scalar::{cq_int, fmt_cq, Cq, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommutatorOrder {
    L1L2,
    L2L1,
}

/// Signs on `∂_t L1` and `∂_x L2` and the order of the commutator term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Convention {
    pub s1: i8,
    pub s2: i8,
    pub order: CommutatorOrder,
}

impl Convention {
    pub const ALL: [Convention; 4] = [
        Convention {
            s1: 1,
            s2: -1,
            order: CommutatorOrder::L1L2,
        },
        Convention {
            s1: 1,
            s2: -1,
            order: CommutatorOrder::L2L1,
        },
        Convention {
            s1: -1,
            s2: 1,
            order: CommutatorOrder::L1L2,
        },
        Convention {
            s1: -1,
            s2: 1,
            order: CommutatorOrder::L2L1,
        },
    ];

    /// The convention whose curvature is the negative of this one.
    pub fn negated(self) -> Convention {
        let order = match self.order {
            CommutatorOrder::L1L2 => CommutatorOrder::L2L1,
            CommutatorOrder::L2L1 => CommutatorOrder::L1L2,
        };
        Convention {
            s1: -self.s1,
            s2: -self.s2,
            order,
        }
    }

    /// Member of the sign class `{c, c.negated()}` with `s1 = +1`.
    pub fn representative(self) -> Convention {
        if self.s1 > 0 {
            self
        } else {
            self.negated()
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |x: i8| if x > 0 { '+' } else { '-' };
        let comm = match self.order {
            CommutatorOrder::L1L2 => "[L1,L2]",
            CommutatorOrder::L2L1 => "[L2,L1]",
        };
        write!(f, "{}dt L1 {} dx L2 + {}", s(self.s1), s(self.s2), comm)
    }
}

impl std::str::FromStr for Convention {
    type Err = ZeroCurvatureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Convention::ALL
            .into_iter()
            .find(|c| c.to_string().replace(' ', "") == s.replace(' ', ""))
            .ok_or_else(|| ZeroCurvatureError::Invalid(format!("unknown convention {s:?}")))
    }
}

/// `s₁ ∂_t L1 + s₂ ∂_x L2 + [·,·]`, with x-jets left formal.
pub fn curvature(lax: &LaxPair, conv: Convention) -> Result<MatrixDP, ZeroCurvatureError> {
    let dt = lax.l1.dt()?;
    let dx = lax.l2.dx()?;
    let comm = match conv.order {
        CommutatorOrder::L1L2 => lax.l1.commutator(&lax.l2)?,
        CommutatorOrder::L2L1 => lax.l2.commutator(&lax.l1)?,
    };
    let signed = |m: &MatrixDP, s: i8| if s > 0 { m.clone() } else { m.neg() };
    Ok(signed(&dt, conv.s1).add(&signed(&dx, conv.s2)).add(&comm))
}

/// Surviving term count of the curvature once `sys` eliminates every x-jet.
pub fn verify_zero_curvature(lax: &LaxPair, sys: &CNLSSystem, conv: Convention) -> Result<usize, ZeroCurvatureError> {
    Ok(curvature(lax, conv)?.substitute(sys)?.term_count())
}

fn trial_system(lax: &LaxPair, abc: &[Scalar; 3]) -> CNLSSystem {
    CNLSSystem::with_coefficients(&lax.k, lax.eps.clone(), abc[0].clone(), abc[1].clone(), abc[2].clone())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConventionOutcome {
    pub convention: Convention,
    pub rows: usize,
    pub rank: usize,
    /// `(a, b, c)` when the linear system has exactly one solution.
    pub solution: Option<[Cq; 3]>,
    /// Terms left at the best coefficients found (0 when `solution` closes).
    pub leftover_terms: usize,
}

impl ConventionOutcome {
    pub fn closes(&self) -> bool {
        self.solution.is_some() && self.leftover_terms == 0
    }
}

fn as_scalars(v: &[Cq]) -> [Scalar; 3] {
    [
        Scalar::from_cq(v[0].clone()),
        Scalar::from_cq(v[1].clone()),
        Scalar::from_cq(v[2].clone()),
    ]
}

fn one_convention(lax: &LaxPair, conv: Convention) -> Result<ConventionOutcome, ZeroCurvatureError> {
    let curv = curvature(lax, conv)?;
    // The substituted residual is affine in (a, b, c); sample it at the origin
    // and the three unit points.
    let z = Scalar::zero;
    let o = Scalar::one;
    let points = [[z(), z(), z()], [o(), z(), z()], [z(), o(), z()], [z(), z(), o()]];
    let residuals: Vec<MatrixDP> = points
        .iter()
        .map(|p| curv.substitute(&trial_system(lax, p)))
        .collect::<Result<_, _>>()?;

    let mut table: BTreeMap<(usize, usize, String, String), [Cq; 4]> = BTreeMap::new();
    for (idx, r) in residuals.iter().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                for (mono, coeff) in r.e[i][j].terms() {
                    for (sm, c) in coeff.terms() {
                        let key = (i, j, mono.to_string(), format!("{sm:?}"));
                        let entry = table.entry(key).or_insert_with(|| std::array::from_fn(|_| cq_int(0)));
                        entry[idx] = c.clone();
                    }
                }
            }
        }
    }
    let rows: Vec<AffineRow> = table
        .values()
        .map(|v| AffineRow {
            coeffs: vec![&v[1] - &v[0], &v[2] - &v[0], &v[3] - &v[0]],
            constant: v[0].clone(),
        })
        .collect();

    let (rank, solution) = match solve_affine(&rows, 3) {
        AffineSolution::Unique(x) => (3, Some([x[0].clone(), x[1].clone(), x[2].clone()])),
        AffineSolution::Underdetermined { rank } | AffineSolution::Inconsistent { rank } => (rank, None),
    };

    let leftover_terms = match &solution {
        Some(x) => curv.substitute(&trial_system(lax, &as_scalars(x)))?.term_count(),
        None => {
            // Greedy consistent subset: the best coefficients that satisfy as
            // many equations as possible in table order.
            let mut kept: Vec<AffineRow> = Vec::new();
            for row in &rows {
                kept.push(row.clone());
                if matches!(solve_affine(&kept, 3), AffineSolution::Inconsistent { .. }) {
                    kept.pop();
                }
            }
            let guess = match solve_affine(&kept, 3) {
                AffineSolution::Unique(x) => as_scalars(&x),
                _ => [o(), o(), o()],
            };
            curv.substitute(&trial_system(lax, &guess))?.term_count()
        }
    };
    Ok(ConventionOutcome {
        convention: conv,
        rows: rows.len(),
        rank,
        solution,
        leftover_terms,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub convention: Convention,
    pub coefficients: [Cq; 3],
    pub system: CNLSSystem,
    /// Every convention whose residual closes.
    pub closing: Vec<Convention>,
    /// Number of distinct sign classes among `closing`.
    pub classes: usize,
    pub outcomes: Vec<ConventionOutcome>,
}

impl Derivation {
    /// One sign class closes with one coefficient triple of full rank.
    pub fn is_unique(&self) -> bool {
        let triples: Vec<&[Cq; 3]> = self
            .outcomes
            .iter()
            .filter(|o| o.closes())
            .filter_map(|o| o.solution.as_ref())
            .collect();
        self.classes == 1 && triples.windows(2).all(|w| w[0] == w[1])
    }
}

/// Solves for the convention and `(a, b, c)` that make the curvature vanish.
pub fn derive_pde(lax: &LaxPair) -> Result<Derivation, ZeroCurvatureError> {
    let outcomes: Vec<ConventionOutcome> = Convention::ALL
        .par_iter()
        .map(|c| one_convention(lax, *c))
        .collect::<Result<_, _>>()?;
    let closing: Vec<Convention> = outcomes.iter().filter(|o| o.closes()).map(|o| o.convention).collect();
    if closing.is_empty() {
        let best = outcomes
            .iter()
            .min_by_key(|o| o.leftover_terms)
            .expect("four conventions");
        return Err(ZeroCurvatureError::NoConvention {
            convention: best.convention,
            min_terms: best.leftover_terms,
        });
    }
    let mut reps: Vec<Convention> = closing.iter().map(|c| c.representative()).collect();
    reps.sort();
    reps.dedup();
    let convention = reps[0];
    let chosen = outcomes
        .iter()
        .find(|o| o.closes() && o.convention.representative() == convention && o.convention.s1 > 0)
        .or_else(|| outcomes.iter().find(|o| o.closes()))
        .expect("closing convention");
    let coefficients = chosen.solution.clone().expect("closing outcome has a solution");
    let system = trial_system(lax, &as_scalars(&coefficients));
    Ok(Derivation {
        convention,
        coefficients,
        system,
        closing,
        classes: reps.len(),
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyResidual {
    pub family: Family,
    pub convention: String,
    pub coefficients: [String; 3],
    pub residual_terms: usize,
    pub closing_conventions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionSummary {
    pub convention: String,
    pub rank: usize,
    pub solution: Option<[String; 3]>,
    pub leftover_terms: usize,
}

/// Machine-readable summary of the derivation across all three families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivationReport {
    pub convention: String,
    pub equivalent_convention: String,
    pub coefficients: [String; 3],
    pub unique: bool,
    pub conventions: Vec<ConventionSummary>,
    pub families: Vec<FamilyResidual>,
    pub negative_control_terms: usize,
    pub constants_map: BTreeMap<String, String>,
}

fn fmt_triple(x: &[Cq; 3]) -> [String; 3] {
    [fmt_cq(&x[0]), fmt_cq(&x[1]), fmt_cq(&x[2])]
}

impl DerivationReport {
    /// Runs `derive_pde` on every family with symbolic constants, checks each
    /// against its own derived system, and runs the `ε → 2ε` control on L.
    pub fn build(constants_map: BTreeMap<String, String>) -> Result<Self, ZeroCurvatureError> {
        let lax_l = symbolic_lax(Family::L);
        let d = derive_pde(&lax_l)?;
        let mut families = Vec::new();
        for fam in Family::ALL {
            let lax = symbolic_lax(fam);
            let df = derive_pde(&lax)?;
            families.push(FamilyResidual {
                family: fam,
                convention: df.convention.to_string(),
                coefficients: fmt_triple(&df.coefficients),
                residual_terms: verify_zero_curvature(&lax, &df.system, df.convention)?,
                closing_conventions: df.closing.iter().map(|c| c.to_string()).collect(),
            });
        }
        let negative_control_terms = verify_zero_curvature(&lax_l, &perturbed_eps(&d.system), d.convention)?;
        Ok(DerivationReport {
            convention: d.convention.to_string(),
            equivalent_convention: d.convention.negated().to_string(),
            coefficients: fmt_triple(&d.coefficients),
            unique: d.is_unique(),
            conventions: d
                .outcomes
                .iter()
                .map(|o| ConventionSummary {
                    convention: o.convention.to_string(),
                    rank: o.rank,
                    solution: o.solution.as_ref().map(fmt_triple),
                    leftover_terms: o.leftover_terms,
                })
                .collect(),
            families,
            negative_control_terms,
            constants_map,
        })
    }
}

/// The same system with `ε` doubled.
pub(crate) fn perturbed_eps(sys: &CNLSSystem) -> CNLSSystem {
    CNLSSystem {
        eps: &sys.eps * &Scalar::int(2),
        ..sys.clone()
    }
}
