use serde::{Deserialize, Serialize};

use super::ZeroCurvatureError;
use crate::diffpoly::{beta, beta_conj, jet, DiffPoly, Field, KMatrix, MatrixDP, Poly};
use crate::scalar::{Scalar, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    /// General coupling `m₁, m₂, κ`.
    L,
    /// Twisted fibre, `m₁ = −m₂ = 𝔪`.
    M,
    /// Birefringent fibre, `m₁ = m₂ = 0`.
    N,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::L, Family::M, Family::N];

    /// Coupling matrix used when a family is built with symbolic constants.
    pub fn symbolic_coupling(self) -> KMatrix {
        match self {
            Family::L => KMatrix::symbolic(),
            Family::M => KMatrix::twisted(),
            Family::N => KMatrix::birefringent(),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = ZeroCurvatureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L" | "l" => Ok(Family::L),
            "M" | "m" => Ok(Family::M),
            "N" | "n" => Ok(Family::N),
            _ => Err(ZeroCurvatureError::Family(format!("unknown family {s:?}"))),
        }
    }
}

/// `Ψ_x = l1 Ψ`, `Ψ_t = l2 Ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxPair {
    pub family: Family,
    pub l1: MatrixDP,
    pub l2: MatrixDP,
    pub k: KMatrix,
    pub eps: Scalar,
}

fn c(s: Scalar) -> DiffPoly {
    DiffPoly::constant(s)
}

fn lam(k: i32) -> DiffPoly {
    Poly::lambda(k)
}

fn bt(k: u8) -> DiffPoly {
    jet(Field::Beta(k), 1)
}

fn bct(k: u8) -> DiffPoly {
    jet(Field::BetaConj(k), 1)
}

fn shared_l2(eps: &Scalar) -> MatrixDP {
    let i = Scalar::i();
    let half_i_eps = &Scalar::rational(1, 2) * &(&i * eps);
    let mut m = MatrixDP::zero();
    m.e[0][0] = lam(1).scale(&crate::scalar::cq_int(2));
    m.e[0][1] = beta_conj(1).mul_scalar(&i);
    m.e[0][2] = beta_conj(2).mul_scalar(&i);
    m.e[1][0] = beta(1).mul_scalar(&half_i_eps);
    m.e[1][1] = -lam(1);
    m.e[2][0] = beta(2).mul_scalar(&half_i_eps);
    m.e[2][2] = -lam(1);
    m
}

fn l_family_l1(k: &KMatrix, eps: &Scalar) -> MatrixDP {
    let i = Scalar::i();
    let h = c(&Scalar::rational(1, 2) * eps);
    let three = Scalar::int(3);
    let mut m = MatrixDP::zero();
    let b11 = &beta(1) * &beta_conj(1);
    let b22 = &beta(2) * &beta_conj(2);
    m.e[0][0] = (&(&(&h * &b11) + &(&h * &b22)) + &lam(2).mul_scalar(&Scalar::int(6))).mul_scalar(&-&i);
    m.e[0][1] = &bct(1) + &(&lam(1) * &beta_conj(1)).mul_scalar(&three);
    m.e[0][2] = &bct(2) + &(&lam(1) * &beta_conj(2)).mul_scalar(&three);
    m.e[1][0] = &h * &(&(-&bt(1)) + &(&lam(1) * &beta(1)).mul_scalar(&three));
    m.e[1][1] = (&(&(&h * &b11) + &lam(2).mul_scalar(&three)) + &c(k.m1.clone())).mul_scalar(&i);
    m.e[1][2] = (&(&h * &(&beta_conj(2) * &beta(1))) + &c(k.kappa.clone())).mul_scalar(&i);
    m.e[2][0] = &h * &(&(-&bt(2)) + &(&lam(1) * &beta(2)).mul_scalar(&three));
    m.e[2][1] = (&(&h * &(&beta(2) * &beta_conj(1))) + &c(k.kappa.clone())).mul_scalar(&i);
    m.e[2][2] = (&(&(&h * &b22) + &lam(2).mul_scalar(&three)) + &c(k.m2.clone())).mul_scalar(&i);
    m
}

fn m_family_l1(mfrak: &Scalar, kappa: &Scalar, eps: &Scalar) -> MatrixDP {
    let i = Scalar::i();
    let h = c(&Scalar::rational(1, 2) * eps);
    let three = Scalar::int(3);
    let mut m = MatrixDP::zero();
    let b11 = &beta(1) * &beta_conj(1);
    let b22 = &beta(2) * &beta_conj(2);
    m.e[0][0] = (&(&(&h * &b11) + &(&h * &b22)) + &lam(2).mul_scalar(&Scalar::int(6))).mul_scalar(&-&i);
    m.e[0][1] = &bct(1) + &(&lam(1) * &beta_conj(1)).mul_scalar(&three);
    m.e[0][2] = &bct(2) + &(&lam(1) * &beta_conj(2)).mul_scalar(&three);
    m.e[1][0] = &h * &(&(-&bt(1)) + &(&lam(1) * &beta(1)).mul_scalar(&three));
    m.e[1][1] = (&(&(&h * &b11) + &lam(2).mul_scalar(&three)) + &c(mfrak.clone())).mul_scalar(&i);
    m.e[1][2] = (&(&h * &(&beta_conj(2) * &beta(1))) + &c(kappa.clone())).mul_scalar(&i);
    m.e[2][0] = &h * &(&(-&bt(2)) + &(&lam(1) * &beta(2)).mul_scalar(&three));
    m.e[2][1] = (&(&h * &(&beta(2) * &beta_conj(1))) + &c(kappa.clone())).mul_scalar(&i);
    m.e[2][2] = (&(&(&h * &b22) + &lam(2).mul_scalar(&three)) - &c(mfrak.clone())).mul_scalar(&i);
    m
}

fn n_family_l1(kappa: &Scalar, eps: &Scalar) -> MatrixDP {
    let i = Scalar::i();
    let h = c(&Scalar::rational(1, 2) * eps);
    let three = Scalar::int(3);
    let mut m = MatrixDP::zero();
    let b11 = &beta(1) * &beta_conj(1);
    let b22 = &beta(2) * &beta_conj(2);
    m.e[0][0] = (&(&(&h * &b11) + &(&h * &b22)) + &lam(2).mul_scalar(&Scalar::int(6))).mul_scalar(&-&i);
    m.e[0][1] = &bct(1) + &(&lam(1) * &beta_conj(1)).mul_scalar(&three);
    m.e[0][2] = &bct(2) + &(&lam(1) * &beta_conj(2)).mul_scalar(&three);
    m.e[1][0] = &h * &(&(-&bt(1)) + &(&lam(1) * &beta(1)).mul_scalar(&three));
    m.e[1][1] = (&(&h * &b11) + &lam(2).mul_scalar(&three)).mul_scalar(&i);
    m.e[1][2] = (&(&h * &(&beta_conj(2) * &beta(1))) + &c(kappa.clone())).mul_scalar(&i);
    m.e[2][0] = &h * &(&(-&bt(2)) + &(&lam(1) * &beta(2)).mul_scalar(&three));
    m.e[2][1] = (&(&h * &(&beta(2) * &beta_conj(1))) + &c(kappa.clone())).mul_scalar(&i);
    m.e[2][2] = (&(&h * &b22) + &lam(2).mul_scalar(&three)).mul_scalar(&i);
    m
}

/// Builds the printed spectral problem of a family. Each family has its own
/// transcription, so the specialization checks compare independent inputs.
pub fn build_lax(family: Family, k: &KMatrix, eps: &Scalar) -> Result<LaxPair, ZeroCurvatureError> {
    let l1 = match family {
        Family::L => l_family_l1(k, eps),
        Family::M => {
            if k.m1 != -&k.m2 {
                return Err(ZeroCurvatureError::Family(format!(
                    "family M needs m1 = -m2, got m1 = {}, m2 = {}",
                    k.m1, k.m2
                )));
            }
            m_family_l1(&k.m1, &k.kappa, eps)
        }
        Family::N => {
            if !k.m1.is_zero() || !k.m2.is_zero() {
                return Err(ZeroCurvatureError::Family(format!(
                    "family N needs m1 = m2 = 0, got m1 = {}, m2 = {}",
                    k.m1, k.m2
                )));
            }
            n_family_l1(&k.kappa, eps)
        }
    };
    Ok(LaxPair {
        family,
        l1,
        l2: shared_l2(eps),
        k: k.clone(),
        eps: eps.clone(),
    })
}

/// The family built with its natural symbolic constants and symbolic `ε`.
pub fn symbolic_lax(family: Family) -> LaxPair {
    build_lax(family, &family.symbolic_coupling(), &Symbol::Epsilon.into())
        .expect("symbolic couplings satisfy family constraints")
}

impl LaxPair {
    /// Replaces a coefficient symbol in both matrices and the coupling.
    pub fn specialize(&self, s: Symbol, v: &Scalar) -> LaxPair {
        LaxPair {
            family: self.family,
            l1: self.l1.subs_symbol(s, v),
            l2: self.l2.subs_symbol(s, v),
            k: KMatrix {
                m1: self.k.m1.substitute(s, v),
                m2: self.k.m2.substitute(s, v),
                kappa: self.k.kappa.substitute(s, v),
            },
            eps: self.eps.substitute(s, v),
        }
    }

    /// Sets every field jet to zero.
    pub fn without_fields(&self) -> LaxPair {
        let kill = |p: &DiffPoly| {
            p.map_vars(&|_: &crate::diffpoly::JetVar| Ok::<_, ()>(DiffPoly::zero()))
                .unwrap()
        };
        LaxPair {
            l1: self.l1.map(kill),
            l2: self.l2.map(kill),
            ..self.clone()
        }
    }
}
