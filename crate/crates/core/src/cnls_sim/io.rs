use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::{Diagnostics, FieldState, Grid, SimError};

/// Rows `x, t, re1, im1, re2, im2`, one per grid point and snapshot.
pub fn write_trajectory_csv<W: Write>(w: W, grid: &Grid, traj: &[FieldState]) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "t", "re1", "im1", "re2", "im2"])?;
    let ts = grid.points();
    for s in traj {
        for (j, t) in ts.iter().enumerate() {
            out.serialize((s.x, t, s.b1[j].re, s.b1[j].im, s.b2[j].re, s.b2[j].im))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_diagnostics_csv<W: Write>(w: W, d: &Diagnostics) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "P", "M", "H"])?;
    for s in &d.samples {
        out.serialize((s.x, s.power, s.momentum, s.hamiltonian))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `t, re1, im1, re2, im2` rows (with header) into a state at `x = 0`.
pub fn read_samples_csv(path: &Path) -> Result<FieldState, SimError> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut s = FieldState {
        x: 0.0,
        b1: Vec::new(),
        b2: Vec::new(),
    };
    for row in rd.deserialize() {
        let (_t, r1, i1, r2, i2): (f64, f64, f64, f64, f64) = row?;
        s.b1.push(Complex64::new(r1, i1));
        s.b2.push(Complex64::new(r2, i2));
    }
    Ok(s)
}

/// Reads a file written by [`write_trajectory_csv`] back into snapshots and
/// the grid implied by its `t` column.
pub fn read_trajectory_csv(path: &Path) -> Result<(Grid, Vec<FieldState>), SimError> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut traj: Vec<FieldState> = Vec::new();
    let mut ts: Vec<f64> = Vec::new();
    for row in rd.deserialize() {
        let (x, t, r1, i1, r2, i2): (f64, f64, f64, f64, f64, f64) = row?;
        if traj.last().is_none_or(|s| s.x != x) {
            if let Some(prev) = traj.last() {
                if prev.b1.len() != ts.len() {
                    return Err(SimError::State(format!(
                        "snapshot at x = {} has {} points, expected {}",
                        prev.x,
                        prev.b1.len(),
                        ts.len()
                    )));
                }
            }
            traj.push(FieldState {
                x,
                b1: Vec::new(),
                b2: Vec::new(),
            });
        }
        let first = traj.len() == 1;
        let s = traj.last_mut().expect("pushed above");
        if first {
            ts.push(t);
        } else if ts.get(s.b1.len()) != Some(&t) {
            return Err(SimError::State(format!(
                "t column at x = {x} differs from the first snapshot"
            )));
        }
        s.b1.push(Complex64::new(r1, i1));
        s.b2.push(Complex64::new(r2, i2));
    }
    if traj.is_empty() || ts.len() < 2 {
        return Err(SimError::State("trajectory has no complete snapshot".into()));
    }
    if traj.last().map(|s| s.b1.len()) != Some(ts.len()) {
        return Err(SimError::State("last snapshot is truncated".into()));
    }
    let grid = Grid::new(ts.len() as f64 * (ts[1] - ts[0]), ts.len())?;
    let expected = grid.points();
    if ts
        .iter()
        .zip(&expected)
        .any(|(a, b)| (a - b).abs() > 1e-9 * grid.period)
    {
        return Err(SimError::Grid("t column is not a centred uniform grid".into()));
    }
    Ok((grid, traj))
}
