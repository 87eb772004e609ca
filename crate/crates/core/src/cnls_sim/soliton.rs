use std::fmt;

use num_complex::Complex64;

use super::{FieldState, Grid, SimError};
use crate::diffpoly::{CNLSSystem, Field, JetVar, KMatrix, Mono, Poly};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonParams {
    pub eta: f64,
    /// Carrier frequency; the envelope moves with `dt/dx = 2a`.
    pub a: f64,
    pub c: [Complex64; 2],
    pub t0: f64,
    pub eps: f64,
}

/// `β_j = c_j η √(2/ε) sech(η(t − t₀ − 2ax)) exp(i(at + (η² − a²)x))`.
pub fn manakov_soliton(p: &SolitonParams, x: f64, grid: &Grid) -> Result<FieldState, SimError> {
    grid.validate()?;
    if !(p.eps > 0.0) {
        return Err(SimError::Soliton(format!("needs eps > 0, got {}", p.eps)));
    }
    if !(p.eta > 0.0) {
        return Err(SimError::Soliton(format!("needs eta > 0, got {}", p.eta)));
    }
    let norm = (p.c[0].norm_sqr() + p.c[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(SimError::Soliton(format!("polarization norm {norm} is not 1")));
    }
    if p.eta * grid.period < 40.0 {
        return Err(SimError::Soliton(format!(
            "eta * T_p = {} < 40, sech tails would wrap",
            p.eta * grid.period
        )));
    }
    let amp = p.eta * (2.0 / p.eps).sqrt();
    let mut s = FieldState::zeros(grid, x);
    for (j, t) in grid.points().into_iter().enumerate() {
        let env = amp / (p.eta * (t - p.t0 - 2.0 * p.a * x)).cosh();
        let ph = Complex64::from_polar(env, p.a * t + (p.eta * p.eta - p.a * p.a) * x);
        s.b1[j] = p.c[0] * ph;
        s.b2[j] = p.c[1] * ph;
    }
    Ok(s)
}

/// Generators of the ring the soliton lives in: `η`, `a`, `S = sech θ`,
/// `Th = tanh θ`, `E = exp(iφ)`, `Eb = exp(−iφ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolitonVar {
    Eta,
    Vel,
    S,
    Th,
    E,
    Eb,
}

impl fmt::Display for SolitonVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolitonVar::Eta => "eta",
            SolitonVar::Vel => "a",
            SolitonVar::S => "S",
            SolitonVar::Th => "Th",
            SolitonVar::E => "E",
            SolitonVar::Eb => "Eb",
        };
        f.write_str(s)
    }
}

type SPoly = Poly<SolitonVar>;

fn v(x: SolitonVar) -> SPoly {
    Poly::var(x)
}

fn d_t(x: &SolitonVar) -> Result<SPoly, String> {
    use SolitonVar::*;
    let i = Scalar::i();
    Ok(match x {
        Eta | Vel => SPoly::zero(),
        S => -&(&(&v(Eta) * &v(S)) * &v(Th)),
        Th => &v(Eta) * &v(S).pow(2),
        E => (&v(Vel) * &v(E)).mul_scalar(&i),
        Eb => (&v(Vel) * &v(Eb)).mul_scalar(&-&i),
    })
}

fn d_x(x: &SolitonVar) -> Result<SPoly, String> {
    use SolitonVar::*;
    let i = Scalar::i();
    let two = Scalar::int(2);
    let w = &v(Eta).pow(2) - &v(Vel).pow(2);
    Ok(match x {
        Eta | Vel => SPoly::zero(),
        S => (&(&(&v(Vel) * &v(Eta)) * &v(S)) * &v(Th)).mul_scalar(&two),
        Th => (&(&v(Vel) * &v(Eta)) * &v(S).pow(2)).mul_scalar(&-&two),
        E => (&w * &v(E)).mul_scalar(&i),
        Eb => (&w * &v(Eb)).mul_scalar(&-&i),
    })
}

/// Applies `Th² = 1 − S²` and `E·Eb = 1`.
fn reduce(p: &SPoly) -> SPoly {
    let mut out = SPoly::zero();
    let one_minus_s2 = &SPoly::one() - &v(SolitonVar::S).pow(2);
    for (m, c) in p.terms() {
        let (mut e, mut eb) = (0u32, 0u32);
        let mut term = SPoly::term(Mono::from_factors(m.lambda, vec![]), c.clone());
        for (x, k) in m.factors() {
            match x {
                SolitonVar::Th => {
                    term = &term * &one_minus_s2.pow(k / 2);
                    if k % 2 == 1 {
                        term = &term * &v(SolitonVar::Th);
                    }
                }
                SolitonVar::E => e = *k,
                SolitonVar::Eb => eb = *k,
                other => term = &term * &v(*other).pow(*k),
            }
        }
        if e > eb {
            term = &term * &v(SolitonVar::E).pow(e - eb);
        } else if eb > e {
            term = &term * &v(SolitonVar::Eb).pow(eb - e);
        }
        out = &out + &term;
    }
    out
}

/// Substitutes the closed form into the 𝔎 = 0 system built by the diffpoly
/// engine and reduces; returns the surviving term count per equation.
///
/// `amp` must satisfy `amp² ε = 2` and the polarization `|c|² = 1`, both
/// exactly, so the check stays in exact arithmetic.
pub fn soliton_closed_form_residual(eps: &Scalar, amp: &Scalar, c: [Scalar; 2]) -> Result<Vec<(Field, usize)>, String> {
    if &(amp * amp) * eps != Scalar::int(2) {
        return Err(format!("amp^2 * eps = {} is not 2", &(amp * amp) * eps));
    }
    let norm = &(&c[0] * &c[0].conj_coefficients()) + &(&c[1] * &c[1].conj_coefficients());
    if norm != Scalar::one() {
        return Err(format!("|c|^2 = {norm} is not 1"));
    }
    residual_in(&CNLSSystem::new(&KMatrix::zero(), eps.clone()), amp, &c)
}

fn residual_in(sys: &CNLSSystem, amp: &Scalar, c: &[Scalar; 2]) -> Result<Vec<(Field, usize)>, String> {
    let base = |f: Field| -> Result<SPoly, String> {
        let env = &(&v(SolitonVar::Eta) * &v(SolitonVar::S)).mul_scalar(amp);
        match f {
            Field::Beta(k) => Ok((env * &v(SolitonVar::E)).mul_scalar(&c[(k - 1) as usize])),
            Field::BetaConj(k) => Ok((env * &v(SolitonVar::Eb)).mul_scalar(&c[(k - 1) as usize].conj_coefficients())),
            Field::Coef(..) => Err("coefficient jets have no closed form".into()),
        }
    };
    let jet = |j: &JetVar| -> Result<SPoly, String> {
        let mut p = base(j.field)?;
        for _ in 0..j.t {
            p = p.derive(&d_t)?;
        }
        for _ in 0..j.x {
            p = p.derive(&d_x)?;
        }
        Ok(p)
    };
    let mut out = Vec::new();
    for f in [Field::Beta(1), Field::Beta(2), Field::BetaConj(1), Field::BetaConj(2)] {
        let r = sys.residual_expr(f).map_vars(&jet)?;
        out.push((f, reduce(&r).term_count()));
    }
    Ok(out)
}
