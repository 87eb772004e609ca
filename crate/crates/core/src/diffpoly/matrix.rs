use std::fmt;

use super::{check_lambda, total_dt, total_dx, CNLSSystem, DiffPoly, DiffPolyError};
use crate::scalar::{Cq, Scalar, Symbol};

/// 3×3 matrix of differential polynomials.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MatrixDP {
    pub e: [[DiffPoly; 3]; 3],
}

impl MatrixDP {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> DiffPoly) -> Self {
        MatrixDP {
            e: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))),
        }
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { DiffPoly::one() } else { DiffPoly::zero() })
    }

    pub fn diag(d: [DiffPoly; 3]) -> Self {
        Self::from_fn(|i, j| if i == j { d[i].clone() } else { DiffPoly::zero() })
    }

    pub fn get(&self, i: usize, j: usize) -> &DiffPoly {
        &self.e[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().flatten().all(DiffPoly::is_zero)
    }

    pub fn term_count(&self) -> usize {
        self.e.iter().flatten().map(DiffPoly::term_count).sum()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| &self.e[i][j] + &o.e[i][j])
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| &self.e[i][j] - &o.e[i][j])
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(|i, j| -&self.e[i][j])
    }

    pub fn scale(&self, c: &Cq) -> Self {
        Self::from_fn(|i, j| self.e[i][j].scale(c))
    }

    pub fn mul_scalar(&self, c: &Scalar) -> Self {
        Self::from_fn(|i, j| self.e[i][j].mul_scalar(c))
    }

    pub fn mul(&self, o: &Self) -> Result<Self, DiffPolyError> {
        let out = Self::from_fn(|i, j| {
            let mut acc = DiffPoly::zero();
            for k in 0..3 {
                acc = &acc + &(&self.e[i][k] * &o.e[k][j]);
            }
            acc
        });
        for p in out.e.iter().flatten() {
            check_lambda(p)?;
        }
        Ok(out)
    }

    /// `AB − BA`.
    pub fn commutator(&self, o: &Self) -> Result<Self, DiffPolyError> {
        Ok(self.mul(o)?.sub(&o.mul(self)?))
    }

    pub fn try_map(&self, f: impl Fn(&DiffPoly) -> Result<DiffPoly, DiffPolyError>) -> Result<Self, DiffPolyError> {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.e[i][j] = f(&self.e[i][j])?;
            }
        }
        Ok(out)
    }

    pub fn dt(&self) -> Result<Self, DiffPolyError> {
        self.try_map(total_dt)
    }

    pub fn dx(&self) -> Result<Self, DiffPolyError> {
        self.try_map(total_dx)
    }

    pub fn substitute(&self, sys: &CNLSSystem) -> Result<Self, DiffPolyError> {
        self.try_map(|p| sys.substitute(p))
    }

    pub fn subs_symbol(&self, s: Symbol, v: &Scalar) -> Self {
        Self::from_fn(|i, j| self.e[i][j].subs_symbol(s, v))
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> Self {
        Self::from_fn(|i, j| f(&self.e[i][j]))
    }
}

impl fmt::Display for MatrixDP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..3 {
            for j in 0..3 {
                writeln!(f, "[{i},{j}] {}", self.e[i][j])?;
            }
        }
        Ok(())
    }
}

pub fn mat_mul(a: &MatrixDP, b: &MatrixDP) -> Result<MatrixDP, DiffPolyError> {
    a.mul(b)
}

pub fn mat_commutator(a: &MatrixDP, b: &MatrixDP) -> Result<MatrixDP, DiffPolyError> {
    a.commutator(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::{beta, beta_conj, Poly};

    fn sample() -> MatrixDP {
        MatrixDP::from_fn(|i, j| match (i + 2 * j) % 3 {
            0 => &beta(1) * &Poly::lambda(1),
            1 => beta_conj(2),
            _ => DiffPoly::sym(Symbol::Kappa),
        })
    }

    #[test]
    fn self_commutator_vanishes() {
        let a = sample();
        assert!(a.commutator(&a).unwrap().is_zero());
    }

    #[test]
    fn diagonals_commute() {
        let a = MatrixDP::diag([DiffPoly::int(1), DiffPoly::sym(Symbol::Kappa), Poly::lambda(2)]);
        let b = MatrixDP::diag([DiffPoly::sym(Symbol::Epsilon), DiffPoly::int(-3), Poly::lambda(-1)]);
        assert!(a.commutator(&b).unwrap().is_zero());
    }

    #[test]
    fn constant_matrix_has_zero_derivative() {
        let a = MatrixDP::diag([DiffPoly::int(1), DiffPoly::sym(Symbol::Kappa), Poly::lambda(2)]);
        assert!(a.dt().unwrap().is_zero());
    }

    #[test]
    fn identity_is_neutral() {
        let a = sample();
        assert_eq!(a.mul(&MatrixDP::identity()).unwrap(), a);
    }
}
