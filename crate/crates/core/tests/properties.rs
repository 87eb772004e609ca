use num_complex::Complex64;
use proptest::prelude::*;

use prolong_core::cnls_sim::*;
use prolong_core::diffpoly::{total_dt, total_dx, CNLSSystem, DiffPoly, Field, JetVar, KMatrix, MatrixDP, Mono, Poly};
use prolong_core::lax_numeric::monodromy;
use prolong_core::loop_algebra::{
    check_relations, evaluate_word, standard_relations, BracketWord, LoopElement, LoopGenerator, MappingTable,
};
use prolong_core::scalar::{cq, rat};
use prolong_core::zero_curvature::{curvature, symbolic_lax, Convention, Family};
use prolong_core::{Scalar, Symbol};

fn scalar() -> impl Strategy<Value = Scalar> {
    (-4i64..=4, 1i64..=3, -3i64..=3, 0u8..6).prop_map(|(re, den, im, shape)| {
        let base = Scalar::from_cq(cq(rat(re, den), rat(im, 1)));
        match shape {
            0 => &base * &Scalar::sym(Symbol::Epsilon),
            1 => &base + &Scalar::sym(Symbol::Kappa),
            2 => &base * &Scalar::sym(Symbol::Lambda).pow(2),
            _ => base,
        }
    })
}

fn generator() -> impl Strategy<Value = LoopGenerator> {
    (0u8..3, 0u8..3, -3i32..=3).prop_map(|(l, m, n)| LoopGenerator { l, m, n })
}

fn element() -> impl Strategy<Value = LoopElement<Scalar>> {
    prop::collection::vec((generator(), scalar()), 0..5).prop_map(|terms| {
        let mut e = LoopElement::zero();
        for (g, c) in terms {
            e.add_term(g, c);
        }
        e
    })
}

fn jet(allow_x: bool) -> impl Strategy<Value = JetVar> {
    (1u8..=2, any::<bool>(), 0u8..=1, any::<bool>()).prop_map(move |(k, conj, t, x)| {
        let field = if conj { Field::BetaConj(k) } else { Field::Beta(k) };
        JetVar::new(field, t, u8::from(allow_x && x))
    })
}

fn poly(allow_x: bool) -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((prop::collection::vec(jet(allow_x), 0..=3), -2i32..=2, scalar()), 0..=4).prop_map(|terms| {
        let mut p = DiffPoly::zero();
        for (vars, lambda, c) in terms {
            p.add_term(
                Mono::from_factors(lambda, vars.into_iter().map(|v| (v, 1)).collect()),
                c,
            );
        }
        p
    })
}

fn word() -> impl Strategy<Value = BracketWord> {
    (1u8..=6).prop_map(BracketWord::leaf).prop_recursive(3, 8, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| BracketWord::br(a, b))
    })
}

fn symbolic_system() -> CNLSSystem {
    CNLSSystem::new(&KMatrix::symbolic(), Symbol::Epsilon.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scalar_display_parses_back(s in scalar()) {
        let back: Scalar = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn bracket_is_antisymmetric(a in element(), b in element()) {
        prop_assert!(a.bracket(&b).add(&b.bracket(&a)).is_zero());
    }

    #[test]
    fn bracket_is_bilinear(a in element(), b in element(), c in element(), k in scalar()) {
        let left = a.mul_coeff(&k).add(&b).bracket(&c);
        prop_assert_eq!(left, a.bracket(&c).mul_coeff(&k).add(&b.bracket(&c)));
    }

    #[test]
    fn bracket_respects_mode_grading(a in generator(), b in generator()) {
        let r = LoopElement::term(a, Scalar::one()).bracket(&LoopElement::term(b, Scalar::one()));
        for (g, _) in r.terms() {
            prop_assert_eq!(g.n, a.n + b.n);
        }
    }

    #[test]
    fn evaluate_word_is_antisymmetric(u in word(), v in word()) {
        let map = MappingTable::standard(1, 1);
        let uv = evaluate_word(&map, &BracketWord::br(u.clone(), v.clone())).unwrap();
        let vu = evaluate_word(&map, &BracketWord::br(v, u)).unwrap();
        prop_assert_eq!(uv, vu.neg());
    }

    #[test]
    fn leibniz_rule(p in poly(false), q in poly(false)) {
        let lhs = total_dt(&(&p * &q)).unwrap();
        let rhs = &(&total_dt(&p).unwrap() * &q) + &(&p * &total_dt(&q).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dt_and_dx_commute(p in poly(false)) {
        let a = total_dx(&total_dt(&p).unwrap()).unwrap();
        let b = total_dt(&total_dx(&p).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn poly_minus_itself_is_zero(p in poly(true)) {
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn substitute_is_idempotent(p in poly(true)) {
        let sys = symbolic_system();
        let once = sys.substitute(&p).unwrap();
        prop_assert!(once.variables().iter().all(|v| v.x == 0));
        prop_assert_eq!(sys.substitute(&once).unwrap(), once);
    }

    #[test]
    fn substitute_is_a_ring_homomorphism(p in poly(true), q in poly(true)) {
        let sys = symbolic_system();
        let (sp, sq) = (sys.substitute(&p).unwrap(), sys.substitute(&q).unwrap());
        prop_assert_eq!(sys.substitute(&(&p + &q)).unwrap(), &sp + &sq);
        prop_assert_eq!(sys.substitute(&(&p * &q)).unwrap(), &sp * &sq);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_identity_shift_leaves_curvature_unchanged(
        c1 in scalar(), c2 in scalar(), k in -2i32..=2, conv in 0usize..4
    ) {
        let conv = Convention::ALL[conv];
        let lax = symbolic_lax(Family::L);
        let base = curvature(&lax, conv).unwrap();
        let shift = |c: &Scalar| MatrixDP::identity().map(|p| (p * &Poly::lambda(k)).mul_scalar(c));
        let mut shifted = lax.clone();
        shifted.l1 = lax.l1.add(&shift(&c1));
        shifted.l2 = lax.l2.add(&shift(&c2));
        prop_assert_eq!(curvature(&shifted, conv).unwrap(), base.clone());

        // A t-dependent shift of L1 (through the field) does change it.
        if !c1.is_zero() {
            let mut moving = lax.clone();
            let b = Poly::var(JetVar::beta(1));
            moving.l1 = lax.l1.add(&MatrixDP::identity().map(|p| (p * &b).mul_scalar(&c1)));
            prop_assert_ne!(curvature(&moving, conv).unwrap(), base);
        }
    }
}

fn smooth_state(grid: &Grid, modes: &[(i32, f64, f64, f64, f64)]) -> FieldState {
    let mut s = FieldState::zeros(grid, 0.0);
    let w = 2.0 * std::f64::consts::PI / grid.period;
    for (j, t) in grid.points().into_iter().enumerate() {
        for &(k, a1, p1, a2, p2) in modes {
            let th = w * f64::from(k) * t;
            s.b1[j] += Complex64::from_polar(a1, th + p1);
            s.b2[j] += Complex64::from_polar(a2, th + p2);
        }
    }
    s
}

fn modes() -> impl Strategy<Value = Vec<(i32, f64, f64, f64, f64)>> {
    prop::collection::vec((-4i32..=4, 0.0..0.4f64, 0.0..6.3f64, 0.0..0.4f64, 0.0..6.3f64), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn split_step_conserves_power(m in modes(), kappa in -1.0..1.0f64, m1 in -1.0..1.0f64) {
        let grid = Grid::new(20.0, 64).unwrap();
        let cfg = SimConfig::new(grid, NumericK { m1, m2: -m1, kappa }, 2.0, 1e-3, 0.05);
        let init = smooth_state(&grid, &m);
        let out = run(&cfg, &init).unwrap();
        prop_assert!(out.diagnostics.power_drift() <= 1e-10, "drift {}", out.diagnostics.power_drift());
    }

    #[test]
    fn global_phase_commutes_with_run(m in modes(), phi in 0.0..6.3f64, kappa in -1.0..1.0f64) {
        let grid = Grid::new(20.0, 64).unwrap();
        let cfg = SimConfig::new(grid, NumericK { m1: 0.3, m2: 0.1, kappa }, 2.0, 1e-3, 0.02);
        let init = smooth_state(&grid, &m);
        let phase = Complex64::from_polar(1.0, phi);
        let a = run(&cfg, &init.scaled(phase)).unwrap();
        let b = run(&cfg, &init).unwrap();
        let d = a.final_state().max_diff(&b.final_state().scaled(phase));
        prop_assert!(d <= 1e-12, "diff {d:e}");
    }

    #[test]
    fn monodromy_has_unit_determinant(m in modes(), lambda in -0.4..0.4f64) {
        let grid = Grid::new(10.0, 32).unwrap();
        let cfg = SimConfig::new(grid, NumericK::default(), 2.0, 1e-3, 0.0);
        let s = smooth_state(&grid, &m);
        let t = monodromy(&s, Complex64::new(lambda, 0.0), &cfg).unwrap();
        prop_assert!((t.det() - 1.0).norm() <= 1e-10, "det {}", t.det());
    }

    #[test]
    fn zero_field_monodromy_is_diagonal_exponential(lambda in -0.5..0.5f64) {
        let grid = Grid::new(20.0, 32).unwrap();
        let cfg = SimConfig::new(grid, NumericK::default(), 2.0, 1e-3, 0.0);
        let t = monodromy(&FieldState::zeros(&grid, 0.0), Complex64::new(lambda, 0.0), &cfg).unwrap();
        let tp = grid.period;
        let expect = [(2.0 * lambda * tp).exp(), (-lambda * tp).exp(), (-lambda * tp).exp()];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { expect[i] } else { 0.0 };
                let err = (t.matrix[(i, j)] - want).norm();
                prop_assert!(err <= 1e-12 * want.abs().max(1.0), "entry ({i},{j}) err {err:e}");
            }
        }
    }
}

#[test]
fn check_relations_is_deterministic() {
    let map = MappingTable::standard(1, 1);
    let rels = standard_relations();
    assert_eq!(
        check_relations(&map, &rels).unwrap(),
        check_relations(&map, &rels).unwrap()
    );
}
