//! Differential polynomials in the jets of `β₁, β₂`, their conjugates and
//! auxiliary unknown functions, Laurent-graded in the spectral parameter.
//!
//! `β` and `β*` are independent symbols here; the reality relation only
//! enters at numeric evaluation.

mod eval;
mod matrix;
mod poly;
mod system;

pub use eval::CompiledPoly;
pub use matrix::{mat_commutator, mat_mul, MatrixDP};
pub use poly::{Mono, Poly, Var};
pub use system::{substitute, CNLSSystem, Coupling, KMatrix};

use std::fmt;

use thiserror::Error;

/// Highest t-derivative order a jet may carry.
pub const MAX_T_ORDER: u8 = 4;
/// Largest `|λ|` power accepted by checked matrix products.
pub const LAMBDA_BOUND: i32 = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffPolyError {
    #[error("t-derivative order of {0} would exceed {MAX_T_ORDER}")]
    TOrderCap(JetVar),
    #[error("x-derivative of {0} would give x-order 2")]
    XOrderCap(JetVar),
    #[error("lambda power {0} outside [-{LAMBDA_BOUND}, {LAMBDA_BOUND}]")]
    LambdaRange(i32),
    #[error("no numeric slot for jet {0}")]
    UnboundJet(JetVar),
    #[error("{0}")]
    Invalid(String),
}

/// Names of the unknown coefficient functions of the connection ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoefName {
    A,
    B,
    C,
    D,
    P,
    K,
}

impl CoefName {
    pub const ALL: [CoefName; 6] = [
        CoefName::A,
        CoefName::B,
        CoefName::C,
        CoefName::D,
        CoefName::P,
        CoefName::K,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Beta(u8),
    BetaConj(u8),
    Coef(CoefName, u8),
}

impl Field {
    pub fn index(self) -> u8 {
        match self {
            Field::Beta(k) | Field::BetaConj(k) | Field::Coef(_, k) => k,
        }
    }

    pub fn is_beta(self) -> bool {
        matches!(self, Field::Beta(_) | Field::BetaConj(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub field: Field,
    pub t: u8,
    pub x: u8,
}

impl JetVar {
    pub fn new(field: Field, t: u8, x: u8) -> Self {
        JetVar { field, t, x }
    }

    pub fn beta(k: u8) -> Self {
        JetVar::new(Field::Beta(k), 0, 0)
    }

    pub fn beta_conj(k: u8) -> Self {
        JetVar::new(Field::BetaConj(k), 0, 0)
    }

    pub fn coef(name: CoefName, k: u8) -> Self {
        JetVar::new(Field::Coef(name, k), 0, 0)
    }

    pub fn dt(self) -> Result<JetVar, DiffPolyError> {
        if self.t >= MAX_T_ORDER {
            return Err(DiffPolyError::TOrderCap(self));
        }
        Ok(JetVar { t: self.t + 1, ..self })
    }

    pub fn dx(self) -> Result<JetVar, DiffPolyError> {
        if self.x >= 1 {
            return Err(DiffPolyError::XOrderCap(self));
        }
        Ok(JetVar { x: 1, ..self })
    }

    pub fn with_t(self, t: u8) -> JetVar {
        JetVar { t, ..self }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field {
            Field::Beta(k) => write!(f, "b{k}")?,
            Field::BetaConj(k) => write!(f, "b{k}*")?,
            Field::Coef(c, k) => write!(f, "{c:?}{k}")?,
        }
        if self.t > 0 || self.x > 0 {
            f.write_str("_")?;
            for _ in 0..self.t {
                f.write_str("t")?;
            }
            for _ in 0..self.x {
                f.write_str("x")?;
            }
        }
        Ok(())
    }
}

pub type DiffPoly = Poly<JetVar>;

pub fn beta(k: u8) -> DiffPoly {
    Poly::var(JetVar::beta(k))
}

pub fn beta_conj(k: u8) -> DiffPoly {
    Poly::var(JetVar::beta_conj(k))
}

pub fn jet(field: Field, t: u8) -> DiffPoly {
    Poly::var(JetVar::new(field, t, 0))
}

/// Total t-derivative.
pub fn total_dt(p: &DiffPoly) -> Result<DiffPoly, DiffPolyError> {
    p.derive(&|v: &JetVar| Ok(Poly::var(v.dt()?)))
}

/// Total x-derivative; rejects inputs that already carry an x-jet.
pub fn total_dx(p: &DiffPoly) -> Result<DiffPoly, DiffPolyError> {
    if let Some(v) = p.variables().into_iter().find(|v| v.x > 0) {
        return Err(DiffPolyError::XOrderCap(v));
    }
    p.derive(&|v: &JetVar| Ok(Poly::var(v.dx()?)))
}

pub fn check_lambda(p: &DiffPoly) -> Result<(), DiffPolyError> {
    if let Some((lo, hi)) = p.lambda_range() {
        for k in [lo, hi] {
            if k.abs() > LAMBDA_BOUND {
                return Err(DiffPolyError::LambdaRange(k));
            }
        }
    }
    Ok(())
}
