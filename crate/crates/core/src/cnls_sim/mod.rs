//! Split-step propagation of the coupled NLS system
//! `iβ_x + β_tt + 𝔎β + ε|β|²β = 0` in `x`, periodic in `t`.

mod diagnostics;
mod io;
mod soliton;
mod spectral;
mod split;

pub use diagnostics::{conserved, Diagnostics, DiagnosticsSample};
pub use io::{read_samples_csv, read_trajectory_csv, write_diagnostics_csv, write_trajectory_csv};
pub use soliton::{manakov_soliton, soliton_closed_form_residual, SolitonParams, SolitonVar};
pub use spectral::Spectral;
pub use split::{run, step, RunOutput, Stepper};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffpoly::KMatrix;

/// Abort threshold for `max |β|`.
pub const BLOW_UP_BOUND: f64 = 1e6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("state does not match grid: {0}")]
    State(String),
    #[error("blow-up at x = {x}: max |beta| = {max}")]
    BlowUp { x: f64, max: f64 },
    #[error("soliton precondition: {0}")]
    Soliton(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Periodic grid `t_j = −T_p/2 + j·T_p/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub period: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(period: f64, n: usize) -> Result<Self, SimError> {
        let g = Grid { period, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(SimError::Grid(format!("N = {} must be a power of two >= 16", self.n)));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(SimError::Grid(format!("period {} must be positive", self.period)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.period / 2.0 + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Angular frequencies in FFT order.
    pub fn omegas(&self) -> Vec<f64> {
        let n = self.n as i64;
        (0..n)
            .map(|j| {
                let k = if j < n / 2 { j } else { j - n };
                2.0 * std::f64::consts::PI * k as f64 / self.period
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub x: f64,
    pub b1: Vec<Complex64>,
    pub b2: Vec<Complex64>,
}

impl FieldState {
    pub fn zeros(grid: &Grid, x: f64) -> Self {
        FieldState {
            x,
            b1: vec![Complex64::new(0.0, 0.0); grid.n],
            b2: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn check(&self, grid: &Grid) -> Result<(), SimError> {
        if self.b1.len() != grid.n || self.b2.len() != grid.n {
            return Err(SimError::State(format!(
                "lengths {} and {} for N = {}",
                self.b1.len(),
                self.b2.len(),
                grid.n
            )));
        }
        if !self
            .b1
            .iter()
            .chain(&self.b2)
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(SimError::State("non-finite sample".into()));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.b1.iter().chain(&self.b2).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_j max(|Δβ₁|, |Δβ₂|)`.
    pub fn max_diff(&self, other: &FieldState) -> f64 {
        let d1 = self.b1.iter().zip(&other.b1).map(|(a, b)| (a - b).norm());
        let d2 = self.b2.iter().zip(&other.b2).map(|(a, b)| (a - b).norm());
        d1.chain(d2).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> FieldState {
        FieldState {
            x: self.x,
            b1: self.b1.iter().map(|z| z * c).collect(),
            b2: self.b2.iter().map(|z| z * c).collect(),
        }
    }
}

/// Real symmetric coupling `[[m₁, κ], [κ, m₂]]` for the numerics.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct NumericK {
    pub m1: f64,
    pub m2: f64,
    pub kappa: f64,
}

impl NumericK {
    pub fn validate(&self) -> Result<(), SimError> {
        if ![self.m1, self.m2, self.kappa].iter().all(|v| v.is_finite()) {
            return Err(SimError::Config("coupling entries must be finite reals".into()));
        }
        Ok(())
    }

    /// Evaluates a symbol-free [`KMatrix`]; entries must be real.
    pub fn from_kmatrix(k: &KMatrix) -> Result<Self, SimError> {
        let num = |s: &crate::scalar::Scalar, name: &str| {
            let c = s
                .as_constant()
                .ok_or_else(|| SimError::Config(format!("{name} = {s} is not numeric")))?;
            let z = crate::scalar::cq_to_f64(&c);
            if z.im != 0.0 {
                return Err(SimError::Config(format!("{name} = {s} is not real")));
            }
            Ok(z.re)
        };
        Ok(NumericK {
            m1: num(&k.m1, "m1")?,
            m2: num(&k.m2, "m2")?,
            kappa: num(&k.kappa, "kappa")?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.m1 == 0.0 && self.m2 == 0.0 && self.kappa == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Strang,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialCondition {
    Soliton {
        eta: f64,
        a: f64,
        /// Polarization as `[[re, im], [re, im]]`.
        c: [[f64; 2]; 2],
        #[serde(default)]
        t0: f64,
    },
    PlaneWave {
        amplitude: [[f64; 2]; 2],
        /// Integer number of periods across the grid.
        #[serde(default)]
        wavenumber: i64,
    },
    /// CSV with columns `t, re1, im1, re2, im2`.
    Samples { path: String },
}

fn default_one() -> usize {
    1
}

fn default_eps() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid: Grid,
    #[serde(default)]
    pub kmatrix: NumericK,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub dx: f64,
    pub x_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Steps between diagnostics samples.
    #[serde(default = "default_one")]
    pub diagnostics_every: usize,
    /// Steps between stored snapshots; 0 keeps the endpoints only.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub initial: Option<InitialCondition>,
}

impl SimConfig {
    pub fn new(grid: Grid, kmatrix: NumericK, eps: f64, dx: f64, x_end: f64) -> Self {
        SimConfig {
            grid,
            kmatrix,
            eps,
            dx,
            x_end,
            scheme: Scheme::Strang,
            diagnostics_every: 1,
            snapshot_every: 0,
            initial: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.grid.validate()?;
        self.kmatrix.validate()?;
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(SimError::Config(format!("dx = {} must be positive", self.dx)));
        }
        if !(self.x_end.is_finite() && self.x_end >= 0.0) {
            return Err(SimError::Config(format!("x_end = {} must be non-negative", self.x_end)));
        }
        if !self.eps.is_finite() {
            return Err(SimError::Config("eps must be finite".into()));
        }
        if self.diagnostics_every == 0 {
            return Err(SimError::Config("diagnostics_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self, SimError> {
        let c: SimConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    /// Builds the configured initial state at `x = 0`.
    pub fn initial_state(&self) -> Result<FieldState, SimError> {
        let init = self
            .initial
            .as_ref()
            .ok_or_else(|| SimError::Config("no initial condition".into()))?;
        let z = |p: [f64; 2]| Complex64::new(p[0], p[1]);
        match init {
            InitialCondition::Soliton { eta, a, c, t0 } => manakov_soliton(
                &SolitonParams {
                    eta: *eta,
                    a: *a,
                    c: [z(c[0]), z(c[1])],
                    t0: *t0,
                    eps: self.eps,
                },
                0.0,
                &self.grid,
            ),
            InitialCondition::PlaneWave { amplitude, wavenumber } => {
                let w = 2.0 * std::f64::consts::PI * *wavenumber as f64 / self.grid.period;
                let phase = |t: f64| Complex64::from_polar(1.0, w * t);
                let ts = self.grid.points();
                Ok(FieldState {
                    x: 0.0,
                    b1: ts.iter().map(|&t| z(amplitude[0]) * phase(t)).collect(),
                    b2: ts.iter().map(|&t| z(amplitude[1]) * phase(t)).collect(),
                })
            }
            InitialCondition::Samples { path } => {
                let s = read_samples_csv(std::path::Path::new(path))?;
                s.check(&self.grid)?;
                Ok(s)
            }
        }
    }
}
