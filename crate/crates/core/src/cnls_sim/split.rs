use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64;

use super::diagnostics::{conserved_with, Diagnostics};
use super::{FieldState, SimConfig, SimError, Spectral, BLOW_UP_BOUND};

/// `exp(i h K)` for a real symmetric 2×2 `K`.
fn coupling_exp(k: &Matrix2<f64>, h: f64) -> [[Complex64; 2]; 2] {
    let eig = SymmetricEigen::new(*k);
    let v = eig.eigenvectors;
    let ph = [
        Complex64::from_polar(1.0, h * eig.eigenvalues[0]),
        Complex64::from_polar(1.0, h * eig.eigenvalues[1]),
    ];
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e = v[(r, 0)] * ph[0] * v[(c, 0)] + v[(r, 1)] * ph[1] * v[(c, 1)];
        }
    }
    out
}

#[derive(Clone, Debug)]
struct LinearStep {
    h: f64,
    dispersion: Vec<Complex64>,
    coupling: [[Complex64; 2]; 2],
}

impl LinearStep {
    fn new(sp: &Spectral, k: &Matrix2<f64>, h: f64) -> Self {
        LinearStep {
            h,
            dispersion: sp
                .omegas()
                .iter()
                .map(|w| Complex64::from_polar(1.0, -h * w * w))
                .collect(),
            coupling: coupling_exp(k, h),
        }
    }
}

/// Strang splitting: half nonlinear phase, exact linear step, half phase.
#[derive(Clone, Debug)]
pub struct Stepper {
    config: SimConfig,
    spectral: Spectral,
    k: Matrix2<f64>,
    full: LinearStep,
}

impl Stepper {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let spectral = Spectral::new(&config.grid);
        let km = config.kmatrix;
        let k = Matrix2::new(km.m1, km.kappa, km.kappa, km.m2);
        let full = LinearStep::new(&spectral, &k, config.dx);
        Ok(Stepper {
            config: config.clone(),
            spectral,
            k,
            full,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    fn nonlinear(&self, s: &mut FieldState, h: f64) {
        let eps = self.config.eps;
        for (u, v) in s.b1.iter_mut().zip(s.b2.iter_mut()) {
            let p = Complex64::from_polar(1.0, eps * (u.norm_sqr() + v.norm_sqr()) * h);
            *u *= p;
            *v *= p;
        }
    }

    fn linear(&self, s: &mut FieldState, lin: &LinearStep) {
        let sp = &self.spectral;
        sp.forward(&mut s.b1);
        sp.forward(&mut s.b2);
        let c = &lin.coupling;
        for j in 0..s.b1.len() {
            let (u, v) = (s.b1[j], s.b2[j]);
            let d = lin.dispersion[j];
            s.b1[j] = d * (c[0][0] * u + c[0][1] * v);
            s.b2[j] = d * (c[1][0] * u + c[1][1] * v);
        }
        sp.inverse(&mut s.b1);
        sp.inverse(&mut s.b2);
    }

    fn advance(&self, s: &mut FieldState, lin: &LinearStep) -> Result<(), SimError> {
        self.nonlinear(s, lin.h / 2.0);
        self.linear(s, lin);
        self.nonlinear(s, lin.h / 2.0);
        s.x += lin.h;
        let max = s.max_abs();
        if !max.is_finite() || max > BLOW_UP_BOUND {
            return Err(SimError::BlowUp { x: s.x, max });
        }
        Ok(())
    }

    /// One step of length `dx`.
    pub fn step(&self, s: &FieldState) -> Result<FieldState, SimError> {
        s.check(&self.config.grid)?;
        let mut out = s.clone();
        self.advance(&mut out, &self.full)?;
        Ok(out)
    }

    /// One step of arbitrary length `h`.
    pub fn step_by(&self, s: &FieldState, h: f64) -> Result<FieldState, SimError> {
        s.check(&self.config.grid)?;
        let mut out = s.clone();
        self.advance(&mut out, &LinearStep::new(&self.spectral, &self.k, h))?;
        Ok(out)
    }

    /// Steps from `init.x` to `init.x + x_end`; a final shorter step lands
    /// exactly on the end point.
    pub fn run(&self, init: &FieldState) -> Result<RunOutput, SimError> {
        init.check(&self.config.grid)?;
        let c = &self.config;
        let ratio = c.x_end / c.dx;
        let n_full = (ratio + 1e-9).floor() as usize;
        let rest = c.x_end - n_full as f64 * c.dx;
        let partial = (rest > 1e-12 * c.x_end.max(1.0)).then(|| LinearStep::new(&self.spectral, &self.k, rest));
        let total = n_full + usize::from(partial.is_some());

        let mut s = init.clone();
        let mut trajectory = vec![s.clone()];
        let mut diagnostics = Diagnostics::default();
        diagnostics.samples.push(conserved_with(&s, c, &self.spectral));
        for i in 1..=total {
            let lin = if i <= n_full {
                &self.full
            } else {
                partial.as_ref().expect("partial step")
            };
            self.advance(&mut s, lin)?;
            let last = i == total;
            if last {
                // Land exactly on the requested end point.
                s.x = init.x + c.x_end;
            }
            if last || (c.snapshot_every > 0 && i % c.snapshot_every == 0) {
                trajectory.push(s.clone());
            }
            if last || i % c.diagnostics_every == 0 {
                diagnostics.samples.push(conserved_with(&s, c, &self.spectral));
            }
        }
        Ok(RunOutput {
            trajectory,
            diagnostics,
            steps: total,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trajectory: Vec<FieldState>,
    pub diagnostics: Diagnostics,
    pub steps: usize,
}

impl RunOutput {
    pub fn final_state(&self) -> &FieldState {
        self.trajectory.last().expect("trajectory holds the initial state")
    }
}

pub fn step(s: &FieldState, c: &SimConfig) -> Result<FieldState, SimError> {
    Stepper::new(c)?.step(s)
}

pub fn run(c: &SimConfig, init: &FieldState) -> Result<RunOutput, SimError> {
    Stepper::new(c)?.run(init)
}
