use std::cell::RefCell;
use std::collections::BTreeMap;

use super::{beta, beta_conj, jet, total_dt, DiffPoly, DiffPolyError, Field, JetVar, Poly};
use crate::scalar::{Scalar, Symbol};

/// Real symmetric coupling matrix `[[m₁, κ], [κ, m₂]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KMatrix {
    pub m1: Scalar,
    pub m2: Scalar,
    pub kappa: Scalar,
}

fn is_real(s: &Scalar) -> bool {
    s.terms().all(|(_, c)| num_traits::Zero::is_zero(&c.im))
}

impl KMatrix {
    /// Rejects entries with a nonzero imaginary part (symbols count as real).
    pub fn new(m1: Scalar, m2: Scalar, kappa: Scalar) -> Result<Self, DiffPolyError> {
        for (name, v) in [("m1", &m1), ("m2", &m2), ("kappa", &kappa)] {
            if !is_real(v) {
                return Err(DiffPolyError::Invalid(format!(
                    "coupling entry {name} = {v} is not real"
                )));
            }
        }
        Ok(KMatrix { m1, m2, kappa })
    }

    /// Independent symbols `m₁, m₂, κ`.
    pub fn symbolic() -> Self {
        KMatrix {
            m1: Symbol::M1.into(),
            m2: Symbol::M2.into(),
            kappa: Symbol::Kappa.into(),
        }
    }

    /// `m₁ = −m₂ = 𝔪`.
    pub fn twisted() -> Self {
        KMatrix {
            m1: Symbol::Mfrak.into(),
            m2: -Scalar::sym(Symbol::Mfrak),
            kappa: Symbol::Kappa.into(),
        }
    }

    /// `m₁ = m₂ = 0`.
    pub fn birefringent() -> Self {
        KMatrix {
            m1: Scalar::zero(),
            m2: Scalar::zero(),
            kappa: Symbol::Kappa.into(),
        }
    }

    pub fn zero() -> Self {
        KMatrix {
            m1: Scalar::zero(),
            m2: Scalar::zero(),
            kappa: Scalar::zero(),
        }
    }

    pub fn matrix(&self) -> Coupling {
        [
            [self.m1.clone(), self.kappa.clone()],
            [self.kappa.clone(), self.m2.clone()],
        ]
    }
}

pub type Coupling = [[Scalar; 2]; 2];

fn transpose(k: &Coupling) -> Coupling {
    [[k[0][0].clone(), k[1][0].clone()], [k[0][1].clone(), k[1][1].clone()]]
}

/// `i β_x = −(a β_tt + b 𝔎β + c ε|β|²β)` together with the conjugate
/// equation `−i β*_x = −(a β*_tt + b 𝔎'β* + c ε|β|²β*)`.
///
/// For a [`KMatrix`] the conjugate coupling `𝔎'` is `𝔎ᵀ`; a general system
/// may carry both matrices separately.
#[derive(Clone, Debug, PartialEq)]
pub struct CNLSSystem {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub coupling: Coupling,
    pub conj_coupling: Coupling,
    pub eps: Scalar,
}

impl CNLSSystem {
    pub fn new(k: &KMatrix, eps: Scalar) -> Self {
        Self::with_coefficients(k, eps, Scalar::one(), Scalar::one(), Scalar::one())
    }

    pub fn with_coefficients(k: &KMatrix, eps: Scalar, a: Scalar, b: Scalar, c: Scalar) -> Self {
        let m = k.matrix();
        Self::general(a, b, c, m.clone(), transpose(&m), eps)
    }

    pub fn general(a: Scalar, b: Scalar, c: Scalar, coupling: Coupling, conj_coupling: Coupling, eps: Scalar) -> Self {
        CNLSSystem {
            a,
            b,
            c,
            coupling,
            conj_coupling,
            eps,
        }
    }

    fn intensity(&self) -> DiffPoly {
        &(&beta(1) * &beta_conj(1)) + &(&beta(2) * &beta_conj(2))
    }

    /// The bracket `a u_tt + b (𝔎u)_k + c ε|β|²u_k` shared by both equations.
    fn rhs(&self, field: Field) -> DiffPoly {
        let (k, conj) = match field {
            Field::Beta(k) => (k, false),
            Field::BetaConj(k) => (k, true),
            Field::Coef(..) => unreachable!("only beta fields have evolution rules"),
        };
        let u = |j: u8| if conj { beta_conj(j) } else { beta(j) };
        let kk = if conj { &self.conj_coupling } else { &self.coupling };
        let row = (k - 1) as usize;
        let mut out = jet(field, 2).mul_scalar(&self.a);
        for j in 1..=2u8 {
            out = &out + &u(j).mul_scalar(&(&self.b * &kk[row][(j - 1) as usize]));
        }
        let nl = (&self.intensity() * &u(k)).mul_scalar(&(&self.c * &self.eps));
        &out + &nl
    }

    /// `β_{k,x}` (or `β*_{k,x}`) expressed through t-jets.
    pub fn x_rule(&self, field: Field) -> DiffPoly {
        let unit = match field {
            Field::Beta(_) => Scalar::i(),
            _ => -Scalar::i(),
        };
        self.rhs(field).mul_scalar(&unit)
    }

    /// The equation itself, `±i u_x + a u_tt + b (𝔎u) + c ε|β|²u`, as a polynomial.
    pub fn residual_expr(&self, field: Field) -> DiffPoly {
        let unit = match field {
            Field::Beta(_) => Scalar::i(),
            _ => -Scalar::i(),
        };
        &Poly::var(JetVar::new(field, 0, 1)).mul_scalar(&unit) + &self.rhs(field)
    }

    fn rule_for(&self, v: &JetVar, memo: &RefCell<BTreeMap<JetVar, DiffPoly>>) -> Result<DiffPoly, DiffPolyError> {
        if let Some(r) = memo.borrow().get(v) {
            return Ok(r.clone());
        }
        let r = if v.t == 0 {
            self.x_rule(v.field)
        } else {
            total_dt(&self.rule_for(&JetVar { t: v.t - 1, ..*v }, memo)?)?
        };
        memo.borrow_mut().insert(*v, r.clone());
        Ok(r)
    }

    /// Eliminates every x-jet of `β`, `β*` (including mixed `t…tx` jets).
    pub fn substitute(&self, p: &DiffPoly) -> Result<DiffPoly, DiffPolyError> {
        if !p.variables().iter().any(|v| v.x > 0 && v.field.is_beta()) {
            return Ok(p.clone());
        }
        let memo = RefCell::new(BTreeMap::new());
        p.map_vars(&|v: &JetVar| {
            if v.x > 0 && v.field.is_beta() {
                self.rule_for(v, &memo)
            } else {
                Ok(Poly::var(*v))
            }
        })
    }
}

pub fn substitute(p: &DiffPoly, sys: &CNLSSystem) -> Result<DiffPoly, DiffPolyError> {
    sys.substitute(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::total_dx;

    fn eps() -> DiffPoly {
        Poly::sym(Symbol::Epsilon)
    }

    #[test]
    fn x_rule_without_coupling() {
        let sys = CNLSSystem::new(&KMatrix::zero(), Symbol::Epsilon.into());
        let bx = Poly::var(JetVar::new(Field::Beta(1), 0, 1));
        let intensity = &(&beta(1) * &beta_conj(1)) + &(&beta(2) * &beta_conj(2));
        let expected = (&jet(Field::Beta(1), 2) + &(&(&eps() * &intensity) * &beta(1))).mul_scalar(&Scalar::i());
        assert_eq!(sys.substitute(&bx).unwrap(), expected);
        let bcx = Poly::var(JetVar::new(Field::BetaConj(1), 0, 1));
        let expected =
            (&jet(Field::BetaConj(1), 2) + &(&(&eps() * &intensity) * &beta_conj(1))).mul_scalar(&-Scalar::i());
        assert_eq!(sys.substitute(&bcx).unwrap(), expected);
        assert_eq!(sys.substitute(&beta(1)).unwrap(), beta(1));
    }

    #[test]
    fn mixed_jets_are_eliminated() {
        let sys = CNLSSystem::new(&KMatrix::symbolic(), Symbol::Epsilon.into());
        let p = total_dx(&(&jet(Field::Beta(2), 1) * &beta_conj(1))).unwrap();
        let out = sys.substitute(&p).unwrap();
        assert!(out.variables().iter().all(|v| v.x == 0));
        assert_eq!(sys.substitute(&out).unwrap(), out);
    }

    #[test]
    fn complex_coupling_rejected() {
        assert!(KMatrix::new(Scalar::i(), Scalar::zero(), Scalar::zero()).is_err());
        assert!(KMatrix::new(Symbol::M1.into(), Scalar::int(2), Symbol::Kappa.into()).is_ok());
    }

    #[test]
    fn residual_vanishes_under_its_own_rule() {
        let sys = CNLSSystem::new(&KMatrix::symbolic(), Symbol::Epsilon.into());
        for f in [Field::Beta(1), Field::Beta(2), Field::BetaConj(1), Field::BetaConj(2)] {
            assert!(sys.substitute(&sys.residual_expr(f)).unwrap().is_zero(), "{f:?}");
        }
    }
}
