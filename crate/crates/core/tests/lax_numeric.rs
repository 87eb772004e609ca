use num_complex::Complex64;
use prolong_core::cnls_sim::*;
use prolong_core::lax_numeric::*;
use prolong_core::zero_curvature::{derive_pde, symbolic_lax, Convention, Family};

fn soliton_run(n: usize, dx: f64, x_end: f64, snapshot_every: usize) -> (SimConfig, RunOutput) {
    let grid = Grid::new(40.0, n).unwrap();
    let mut cfg = SimConfig::new(grid, NumericK::default(), 2.0, dx, x_end);
    cfg.snapshot_every = snapshot_every;
    let p = SolitonParams {
        eta: 1.0,
        a: 0.5,
        c: [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        t0: 0.0,
        eps: 2.0,
    };
    let init = manakov_soliton(&p, 0.0, &grid).unwrap();
    let out = run(&cfg, &init).unwrap();
    (cfg, out)
}

fn derived_convention() -> Convention {
    derive_pde(&symbolic_lax(Family::L)).unwrap().convention
}

#[test]
fn soliton_traces_are_conserved_and_det_is_one() {
    let (cfg, out) = soliton_run(512, 1e-3, 1.0, 100);
    let rows = invariant_scan(&out.trajectory, &[0.0, 0.3, -0.3], &cfg).unwrap();
    for lam in [0.0, 0.3, -0.3] {
        let d = relative_trace_drift(&rows, lam);
        println!("lambda {lam}: trace drift {d:e}");
        assert!(d <= 1e-6);
    }
    for r in &rows {
        let det = Complex64::new(r.det[0], r.det[1]);
        assert!((det - 1.0).norm() <= 1e-8, "{det}");
        assert_eq!(r.eigenvalues.len(), 3);
    }
}

#[test]
fn zero_field_scan_is_constant() {
    let grid = Grid::new(20.0, 32).unwrap();
    let cfg = SimConfig::new(grid, NumericK::default(), 2.0, 0.1, 0.3);
    let traj: Vec<FieldState> = (0..4).map(|k| FieldState::zeros(&grid, k as f64 * 0.1)).collect();
    let rows = invariant_scan(&traj, &DEFAULT_LAMBDAS, &cfg).unwrap();
    assert_eq!(rows.len(), 20);
    for lam in DEFAULT_LAMBDAS {
        assert_eq!(relative_trace_drift(&rows, lam), 0.0);
    }
    assert!(residual_fd(&traj, 0.3, &cfg, derived_convention(), Family::L).unwrap() < 1e-12);
}

#[test]
fn residual_is_convention_sensitive() {
    let (cfg, out) = soliton_run(256, 1e-3, 0.01, 1);
    let good = derived_convention();
    let mut small = Vec::new();
    for conv in Convention::ALL {
        let r = residual_fd(&out.trajectory, 0.3, &cfg, conv, Family::L).unwrap();
        println!("{conv}: {r:e}");
        if r < 1e-3 {
            small.push(conv);
        }
    }
    small.sort();
    let mut want = vec![good, good.negated()];
    want.sort();
    assert_eq!(small, want);
}
