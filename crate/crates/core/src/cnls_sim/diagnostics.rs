use serde::{Deserialize, Serialize};

use super::{FieldState, SimConfig, Spectral};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample {
    pub x: f64,
    pub power: f64,
    pub momentum: f64,
    pub hamiltonian: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub samples: Vec<DiagnosticsSample>,
}

fn drift(values: impl Iterator<Item = f64>, relative: bool) -> f64 {
    let v: Vec<f64> = values.collect();
    let Some(&q0) = v.first() else { return 0.0 };
    let scale = if relative && q0 != 0.0 { q0.abs() } else { 1.0 };
    v.iter().map(|q| (q - q0).abs() / scale).fold(0.0, f64::max)
}

impl Diagnostics {
    /// `max |P(x) − P(0)| / |P(0)|`.
    pub fn power_drift(&self) -> f64 {
        drift(self.samples.iter().map(|s| s.power), true)
    }

    pub fn hamiltonian_drift(&self) -> f64 {
        drift(self.samples.iter().map(|s| s.hamiltonian), true)
    }

    /// Absolute, since `M` vanishes for symmetric data.
    pub fn momentum_drift(&self) -> f64 {
        drift(self.samples.iter().map(|s| s.momentum), false)
    }
}

/// `P`, `M`, `H` of one state, with spectral `β_t`.
pub fn conserved(s: &FieldState, c: &SimConfig) -> DiagnosticsSample {
    conserved_with(s, c, &Spectral::new(&c.grid))
}

pub(crate) fn conserved_with(s: &FieldState, c: &SimConfig, sp: &Spectral) -> DiagnosticsSample {
    let dt = c.grid.spacing();
    let k = c.kmatrix;
    let d1 = sp.derivative(&s.b1, 1);
    let d2 = sp.derivative(&s.b2, 1);
    let (mut p, mut m, mut h) = (0.0, 0.0, 0.0);
    for j in 0..s.b1.len() {
        let (u, v) = (s.b1[j], s.b2[j]);
        let i2 = u.norm_sqr() + v.norm_sqr();
        p += i2;
        m += (u.conj() * d1[j] + v.conj() * d2[j]).im;
        let kb = k.m1 * u.norm_sqr() + k.m2 * v.norm_sqr() + 2.0 * k.kappa * (u.conj() * v).re;
        h += d1[j].norm_sqr() + d2[j].norm_sqr() - 0.5 * c.eps * i2 * i2 - kb;
    }
    DiagnosticsSample {
        x: s.x,
        power: p * dt,
        momentum: m * dt,
        hamiltonian: h * dt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnls_sim::{Grid, NumericK};
    use num_complex::Complex64;

    #[test]
    fn zero_state_has_zero_invariants() {
        let c = SimConfig::new(
            Grid::new(10.0, 16).unwrap(),
            NumericK {
                m1: 1.0,
                m2: 2.0,
                kappa: 0.5,
            },
            2.0,
            0.1,
            1.0,
        );
        let d = conserved(&FieldState::zeros(&c.grid, 0.0), &c);
        assert_eq!((d.power, d.momentum, d.hamiltonian), (0.0, 0.0, 0.0));
    }

    #[test]
    fn plane_wave_momentum() {
        let g = Grid::new(2.0 * std::f64::consts::PI, 32).unwrap();
        let c = SimConfig::new(g, NumericK::default(), 0.0, 0.1, 1.0);
        let b1: Vec<Complex64> = g
            .points()
            .iter()
            .map(|&t| Complex64::from_polar(1.0, 2.0 * t))
            .collect();
        let s = FieldState {
            x: 0.0,
            b1,
            b2: vec![Complex64::new(0.0, 0.0); 32],
        };
        let d = conserved(&s, &c);
        let tp = 2.0 * std::f64::consts::PI;
        assert!((d.power - tp).abs() < 1e-12);
        assert!((d.momentum - 2.0 * tp).abs() < 1e-11);
        assert!((d.hamiltonian - 4.0 * tp).abs() < 1e-11);
    }
}
