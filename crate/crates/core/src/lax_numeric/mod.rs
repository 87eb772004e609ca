//! Numeric Lax matrices on simulated fields: t-monodromy, its invariants
//! along x, and a finite-difference zero-curvature residual.

use nalgebra::{Matrix3, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use twofloat::TwoFloat;

use crate::cnls_sim::{FieldState, SimConfig, SimError, Spectral};
use crate::diffpoly::{CompiledPoly, DiffPolyError, Field, JetVar};
use crate::scalar::Symbol;
use crate::zero_curvature::{symbolic_lax, CommutatorOrder, Convention, Family};

pub type CMat = Matrix3<Complex64>;

/// Default spectral parameters for scans.
pub const DEFAULT_LAMBDAS: [f64; 5] = [0.0, 0.3, -0.3, 1.0, -1.0];

#[derive(Debug, Error)]
pub enum LaxNumericError {
    #[error("family {family:?}: {reason}")]
    Family { family: Family, reason: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    DiffPoly(#[from] DiffPolyError),
    #[error("monodromy integration produced non-finite values at lambda = {0}")]
    Unstable(Complex64),
    #[error("complex lambda {0} needs allow_complex")]
    ComplexLambda(Complex64),
    #[error("need at least 3 snapshots, got {0}")]
    TooFewSnapshots(usize),
    #[error("snapshots are not uniformly spaced in x")]
    NonUniform,
}

/// `L1(t_j)`, `L2(t_j)` on every grid point for one `x` and `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxSample {
    pub x: f64,
    pub lambda: Complex64,
    pub l1: Vec<CMat>,
    pub l2: Vec<CMat>,
}

/// The printed matrices compiled for floating-point evaluation with the
/// coupling and `ε` of a config.
#[derive(Clone, Debug)]
pub struct CompiledLax {
    pub family: Family,
    l1: Vec<CompiledPoly>,
    l2: Vec<CompiledPoly>,
}

fn slot(v: &JetVar) -> Option<usize> {
    if v.x > 0 || v.t > 1 {
        return None;
    }
    let base = match v.field {
        Field::Beta(k) => (k - 1) as usize,
        Field::BetaConj(k) => 2 + (k - 1) as usize,
        Field::Coef(..) => return None,
    };
    Some(base + 4 * v.t as usize)
}

impl CompiledLax {
    pub fn new(family: Family, c: &SimConfig) -> Result<Self, LaxNumericError> {
        let k = c.kmatrix;
        let fail = |reason: String| LaxNumericError::Family { family, reason };
        match family {
            Family::M if k.m1 != -k.m2 => return Err(fail(format!("needs m1 = -m2, got {} and {}", k.m1, k.m2))),
            Family::N if k.m1 != 0.0 || k.m2 != 0.0 => {
                return Err(fail(format!("needs m1 = m2 = 0, got {} and {}", k.m1, k.m2)))
            }
            _ => {}
        }
        let lax = symbolic_lax(family);
        let sym = |s: Symbol| {
            Complex64::new(
                match s {
                    Symbol::M1 | Symbol::Mfrak => k.m1,
                    Symbol::M2 => k.m2,
                    Symbol::Kappa => k.kappa,
                    Symbol::Epsilon => c.eps,
                    _ => 0.0,
                },
                0.0,
            )
        };
        let compile = |m: &crate::diffpoly::MatrixDP| -> Result<Vec<CompiledPoly>, DiffPolyError> {
            m.e.iter()
                .flatten()
                .map(|p| CompiledPoly::compile(p, &sym, &slot))
                .collect()
        };
        Ok(CompiledLax {
            family,
            l1: compile(&lax.l1)?,
            l2: compile(&lax.l2)?,
        })
    }

    fn eval(polys: &[CompiledPoly], jets: &[Complex64], lambda: Complex64) -> CMat {
        CMat::from_fn(|i, j| polys[3 * i + j].eval(jets, lambda))
    }

    pub fn l1(&self, jets: &[Complex64; 8], lambda: Complex64) -> CMat {
        Self::eval(&self.l1, jets, lambda)
    }

    pub fn l2(&self, jets: &[Complex64; 8], lambda: Complex64) -> CMat {
        Self::eval(&self.l2, jets, lambda)
    }
}

fn jets_of(s: &FieldState, sp: &Spectral) -> Vec<[Complex64; 8]> {
    let t1 = sp.derivative(&s.b1, 1);
    let t2 = sp.derivative(&s.b2, 1);
    (0..s.b1.len())
        .map(|j| {
            [
                s.b1[j],
                s.b2[j],
                s.b1[j].conj(),
                s.b2[j].conj(),
                t1[j],
                t2[j],
                t1[j].conj(),
                t2[j].conj(),
            ]
        })
        .collect()
}

/// Evaluates both matrices on the grid, with spectral `β_t` and `β* = conj(β)`.
pub fn sample_lax(
    s: &FieldState,
    lambda: Complex64,
    c: &SimConfig,
    family: Family,
) -> Result<LaxSample, LaxNumericError> {
    s.check(&c.grid)?;
    let lax = CompiledLax::new(family, c)?;
    let sp = Spectral::new(&c.grid);
    Ok(sample_with(&lax, &sp, s, lambda))
}

fn sample_with(lax: &CompiledLax, sp: &Spectral, s: &FieldState, lambda: Complex64) -> LaxSample {
    let jets = jets_of(s, sp);
    LaxSample {
        x: s.x,
        lambda,
        l1: jets.iter().map(|j| lax.l1(j, lambda)).collect(),
        l2: jets.iter().map(|j| lax.l2(j, lambda)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyOptions {
    /// Largest `h · max|O(t)|` allowed, with `O` the field part of `L2`.
    pub step_bound: f64,
    /// Largest `h · ω` allowed for the highest resolved Fourier mode of `β`.
    pub band_bound: f64,
    /// Relative Frobenius agreement required between the last two refinements.
    pub tolerance: f64,
    pub allow_complex: bool,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        MonodromyOptions {
            step_bound: 0.01,
            band_bound: 0.05,
            tolerance: 1e-12,
            allow_complex: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monodromy {
    pub x: f64,
    pub lambda: Complex64,
    pub matrix: CMat,
    pub steps: usize,
}

impl Monodromy {
    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn trace_sq(&self) -> Complex64 {
        (self.matrix * self.matrix).trace()
    }

    /// Cofactor expansion in double-double arithmetic. LU in `f64` cancels
    /// badly once `‖T‖` is large even though `det T = 1`.
    pub fn det(&self) -> Complex64 {
        det_dd(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut ev: Vec<Complex64> = Schur::new(self.matrix)
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    }
}

#[derive(Clone, Copy)]
struct CDd {
    re: TwoFloat,
    im: TwoFloat,
}

impl CDd {
    fn of(z: Complex64) -> Self {
        CDd {
            re: TwoFloat::from_f64(z.re),
            im: TwoFloat::from_f64(z.im),
        }
    }

    fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn add(self, o: CDd) -> CDd {
        CDd {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn sub(self, o: CDd) -> CDd {
        CDd {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

fn det_dd(m: &CMat) -> Complex64 {
    let e = |r: usize, c: usize| CDd::of(m[(r, c)]);
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| e(r0, c0).mul(e(r1, c1)).sub(e(r0, c1).mul(e(r1, c0)));
    let d = e(0, 0)
        .mul(minor(1, 2, 1, 2))
        .sub(e(0, 1).mul(minor(1, 2, 0, 2)))
        .add(e(0, 2).mul(minor(1, 2, 0, 1)));
    Complex64::new(f64::from(d.re), f64::from(d.im))
}

/// Largest `|ω|` whose Fourier coefficient is above roundoff relative to the
/// strongest mode.
fn band_limit(sp: &Spectral, u: &[Complex64]) -> f64 {
    let mut buf = u.to_vec();
    sp.forward(&mut buf);
    let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    buf.iter()
        .zip(sp.omegas())
        .filter(|(z, _)| z.norm() > 1e-13 * peak)
        .map(|(_, w)| w.abs())
        .fold(0.0, f64::max)
}

/// `T(λ) = Φ(T_p/2)` for `Φ_t = L2 Φ`, `Φ(−T_p/2) = I`, by Lawson RK4: the
/// constant diagonal `diag(2λ, −λ, −λ)` is integrated exactly, the field part
/// by classical RK4 on band-limited interpolants of `β`, with the step halved
/// until two successive results agree to `tolerance`.
pub fn monodromy(s: &FieldState, lambda: Complex64, c: &SimConfig) -> Result<Monodromy, LaxNumericError> {
    monodromy_with(s, lambda, c, &MonodromyOptions::default())
}

pub fn monodromy_with(
    s: &FieldState,
    lambda: Complex64,
    c: &SimConfig,
    opts: &MonodromyOptions,
) -> Result<Monodromy, LaxNumericError> {
    s.check(&c.grid)?;
    if lambda.im != 0.0 && !opts.allow_complex {
        return Err(LaxNumericError::ComplexLambda(lambda));
    }
    let sp = Spectral::new(&c.grid);
    let n = c.grid.n;
    let omax =
        s.b1.iter()
            .zip(&s.b2)
            .map(|(u, v)| ((1.0 + (0.5 * c.eps).powi(2)) * (u.norm_sqr() + v.norm_sqr())).sqrt())
            .fold(0.0, f64::max);
    let omega = band_limit(&sp, &s.b1).max(band_limit(&sp, &s.b2));
    // Each RK4 step spans two points of the refined grid.
    let mut factor = 2usize;
    loop {
        let h = 2.0 * c.grid.period / (n * factor) as f64;
        if omax * h <= opts.step_bound && omega * h <= opts.band_bound {
            break;
        }
        factor *= 2;
    }
    // Step doubling until successive results agree or stop improving
    // (the roundoff floor).
    let mut coarse = lawson_rk4(&sp, s, lambda, c, factor);
    let mut last_diff = f64::INFINITY;
    loop {
        factor *= 2;
        let fine = lawson_rk4(&sp, s, lambda, c, factor);
        if !fine.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LaxNumericError::Unstable(lambda));
        }
        let diff = (fine - coarse).norm();
        if diff <= opts.tolerance * fine.norm().max(1.0) || diff >= last_diff {
            return Ok(Monodromy {
                x: s.x,
                lambda,
                matrix: fine,
                steps: n * factor / 2,
            });
        }
        if n * factor > MAX_REFINED_POINTS {
            return Err(LaxNumericError::Unstable(lambda));
        }
        coarse = fine;
        last_diff = diff;
    }
}

/// Cap on the refined grid used by the step-doubling loop.
const MAX_REFINED_POINTS: usize = 1 << 22;

/// One Lawson RK4 pass on the grid refined by `factor`.
fn lawson_rk4(sp: &Spectral, s: &FieldState, lambda: Complex64, c: &SimConfig, factor: usize) -> CMat {
    let i = Complex64::new(0.0, 1.0);
    let half_eps = Complex64::new(0.5 * c.eps, 0.0);
    let f1 = sp.upsample(&s.b1, factor);
    let f2 = sp.upsample(&s.b2, factor);
    let m = c.grid.n * factor;
    let field = |k: usize| {
        let k = k % m;
        let mut o = CMat::zeros();
        o[(0, 1)] = i * f1[k].conj();
        o[(0, 2)] = i * f2[k].conj();
        o[(1, 0)] = i * half_eps * f1[k];
        o[(2, 0)] = i * half_eps * f2[k];
        o
    };
    let steps = m / 2;
    let h = c.grid.period / steps as f64;
    let d = [2.0 * lambda, -lambda, -lambda];
    let e_half = CMat::from_diagonal(&nalgebra::Vector3::from_fn(|r, _| (d[r] * h / 2.0).exp()));
    let e_full = e_half * e_half;
    let mut phi = CMat::identity();
    let hc = Complex64::new(h, 0.0);
    let half = Complex64::new(h / 2.0, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for st in 0..steps {
        let (o0, om, o1) = (field(2 * st), field(2 * st + 1), field(2 * st + 2));
        let k1 = o0 * phi;
        let k2 = om * (e_half * (phi + k1 * half));
        let k3 = om * (e_half * phi + k2 * half);
        let k4 = o1 * (e_full * phi + e_half * k3 * hc);
        phi = e_full * phi + (e_full * k1 + e_half * (k2 + k3) * two + k4) * sixth;
    }
    phi
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantRow {
    pub x: f64,
    pub lambda: f64,
    pub trace: [f64; 2],
    pub trace_sq: [f64; 2],
    pub det: [f64; 2],
    pub eigenvalues: Vec<[f64; 2]>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Monodromy invariants at every snapshot and `λ`, ordered by `(x, λ)` index.
pub fn invariant_scan(
    traj: &[FieldState],
    lambdas: &[f64],
    c: &SimConfig,
) -> Result<Vec<InvariantRow>, LaxNumericError> {
    let jobs: Vec<(usize, usize)> = (0..traj.len())
        .flat_map(|a| (0..lambdas.len()).map(move |b| (a, b)))
        .collect();
    jobs.par_iter()
        .map(|&(a, b)| {
            let t = monodromy(&traj[a], Complex64::new(lambdas[b], 0.0), c)?;
            Ok(InvariantRow {
                x: traj[a].x,
                lambda: lambdas[b],
                trace: pair(t.trace()),
                trace_sq: pair(t.trace_sq()),
                det: pair(t.det()),
                eigenvalues: t.eigenvalues().into_iter().map(pair).collect(),
            })
        })
        .collect()
}

/// Common x-spacing of a trajectory with at least two snapshots.
pub fn check_uniform(traj: &[FieldState]) -> Result<f64, LaxNumericError> {
    if traj.len() < 2 {
        return Err(LaxNumericError::TooFewSnapshots(traj.len()));
    }
    let dx = traj[1].x - traj[0].x;
    if !(dx > 0.0) || traj.windows(2).any(|w| ((w[1].x - w[0].x) - dx).abs() > 1e-9 * dx) {
        return Err(LaxNumericError::NonUniform);
    }
    Ok(dx)
}

/// `max_x |tr T(x) − tr T(x₀)| / |tr T(x₀)|` for one `λ` in a scan.
pub fn relative_trace_drift(rows: &[InvariantRow], lambda: f64) -> f64 {
    let tr: Vec<Complex64> = rows
        .iter()
        .filter(|r| r.lambda == lambda)
        .map(|r| Complex64::new(r.trace[0], r.trace[1]))
        .collect();
    let Some(&t0) = tr.first() else { return 0.0 };
    let scale = if t0.norm() > 0.0 { t0.norm() } else { 1.0 };
    tr.iter().map(|t| (t - t0).norm() / scale).fold(0.0, f64::max)
}

/// Max-norm of `s₁ ∂_t L1 + s₂ ∂_x L2 + [·,·]` over the grid and the interior
/// snapshots, with `∂_x` by centred differences and `∂_t` spectral.
pub fn residual_fd(
    traj: &[FieldState],
    lambda: f64,
    c: &SimConfig,
    conv: Convention,
    family: Family,
) -> Result<f64, LaxNumericError> {
    if traj.len() < 3 {
        return Err(LaxNumericError::TooFewSnapshots(traj.len()));
    }
    let dx = check_uniform(traj)?;
    let lax = CompiledLax::new(family, c)?;
    let sp = Spectral::new(&c.grid);
    let lam = Complex64::new(lambda, 0.0);
    let samples: Vec<LaxSample> = traj.par_iter().map(|s| sample_with(&lax, &sp, s, lam)).collect();
    let n = c.grid.n;
    let worst = (1..traj.len() - 1)
        .into_par_iter()
        .map(|idx| {
            let cur = &samples[idx];
            // ∂_t L1 entry by entry.
            let mut dt_l1 = vec![CMat::zeros(); n];
            for r in 0..3 {
                for q in 0..3 {
                    let col: Vec<Complex64> = cur.l1.iter().map(|m| m[(r, q)]).collect();
                    for (j, v) in sp.derivative(&col, 1).into_iter().enumerate() {
                        dt_l1[j][(r, q)] = v;
                    }
                }
            }
            let mut worst = 0.0f64;
            for j in 0..n {
                let dx_l2 = (samples[idx + 1].l2[j] - samples[idx - 1].l2[j]) / Complex64::new(2.0 * dx, 0.0);
                let (a, b) = (cur.l1[j], cur.l2[j]);
                let comm = match conv.order {
                    CommutatorOrder::L1L2 => a * b - b * a,
                    CommutatorOrder::L2L1 => b * a - a * b,
                };
                let res =
                    dt_l1[j] * Complex64::new(conv.s1 as f64, 0.0) + dx_l2 * Complex64::new(conv.s2 as f64, 0.0) + comm;
                worst = worst.max(res.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}
