//! Lax matrices of the coupled NLS family, their zero-curvature residual,
//! and the loop-algebra connection ansatz with its coefficient constraints.

mod ansatz;
mod derive;
mod lax;

pub use ansatz::{
    ansatz_constraints, proposition_round_trip, read_off_system, verify_proposition, AnsatzDerivation, BracketModel,
    CoefficientSolution, ConnectionAnsatz, Constraint, ConstraintCheck, FieldEquation, PropositionReport, RoundTrip,
};
pub use derive::{
    curvature, derive_pde, verify_zero_curvature, CommutatorOrder, Convention, ConventionOutcome, Derivation,
    DerivationReport, FamilyResidual,
};
pub use lax::{build_lax, symbolic_lax, Family, LaxPair};

use thiserror::Error;

use crate::diffpoly::DiffPolyError;
use crate::loop_algebra::LoopGenerator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroCurvatureError {
    #[error("{0}")]
    Family(String),
    #[error(transparent)]
    DiffPoly(#[from] DiffPolyError),
    #[error("no convention closes; smallest leftover is {min_terms} terms under {convention}")]
    NoConvention { convention: Convention, min_terms: usize },
    #[error("ansatz slots collide at {0} for the chosen (n, l)")]
    SlotCollision(LoopGenerator),
    #[error("{0}")]
    Invalid(String),
}
