use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

/// FFT plans and wavenumbers for one grid.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    omegas: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            n: grid.n,
            omegas: grid.omegas(),
            fwd: planner.plan_fft_forward(grid.n),
            inv: planner.plan_fft_inverse(grid.n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse transform including the `1/N` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }

    /// `d^order/dt^order` by Fourier multiplier. Odd orders drop the Nyquist
    /// mode so real data stays real.
    pub fn derivative(&self, u: &[Complex64], order: u32) -> Vec<Complex64> {
        let mut buf = u.to_vec();
        self.forward(&mut buf);
        let nyq = self.n / 2;
        for (j, z) in buf.iter_mut().enumerate() {
            if order % 2 == 1 && j == nyq {
                *z = Complex64::new(0.0, 0.0);
                continue;
            }
            *z *= Complex64::new(0.0, self.omegas[j]).powu(order);
        }
        self.inverse(&mut buf);
        buf
    }

    /// Band-limited interpolation onto `factor` times as many points.
    pub fn upsample(&self, u: &[Complex64], factor: usize) -> Vec<Complex64> {
        if factor <= 1 {
            return u.to_vec();
        }
        let mut buf = u.to_vec();
        self.forward(&mut buf);
        let m = self.n * factor;
        let mut big = vec![Complex64::new(0.0, 0.0); m];
        let half = self.n / 2;
        big[..half].copy_from_slice(&buf[..half]);
        big[m - half + 1..].copy_from_slice(&buf[half + 1..]);
        // Split the Nyquist coefficient symmetrically.
        big[half] = buf[half] * 0.5;
        big[m - half] = buf[half] * 0.5;
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(m).process(&mut big);
        let s = 1.0 / self.n as f64;
        for z in big.iter_mut() {
            *z *= s;
        }
        big
    }
}
