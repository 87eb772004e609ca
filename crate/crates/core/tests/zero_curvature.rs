use prolong_core::diffpoly::{CNLSSystem, KMatrix};
use prolong_core::scalar::{cq_int, Scalar, Symbol};
use prolong_core::zero_curvature::*;

fn eps() -> Scalar {
    Symbol::Epsilon.into()
}

#[test]
fn l_family_derivation_is_unique_per_sign_class() {
    let lax = symbolic_lax(Family::L);
    let d = derive_pde(&lax).unwrap();
    assert!(d.is_unique());
    assert_eq!(d.coefficients, [cq_int(1), cq_int(1), cq_int(1)]);
    assert_eq!(d.convention, Convention::ALL[0]);
    assert_eq!(d.closing.len(), 2);
    for o in &d.outcomes {
        println!(
            "{} rank {} leftover {} rows {}",
            o.convention, o.rank, o.leftover_terms, o.rows
        );
    }
}

#[test]
fn every_family_closes_on_its_own_system() {
    for fam in Family::ALL {
        let lax = symbolic_lax(fam);
        let d = derive_pde(&lax).unwrap();
        assert_eq!(d.coefficients, [cq_int(1), cq_int(1), cq_int(1)], "{fam:?}");
        assert_eq!(verify_zero_curvature(&lax, &d.system, d.convention).unwrap(), 0);
        let zero = lax.without_fields();
        assert_eq!(verify_zero_curvature(&zero, &d.system, d.convention).unwrap(), 0);
    }
}

#[test]
fn doubled_eps_is_rejected() {
    let lax = symbolic_lax(Family::L);
    let d = derive_pde(&lax).unwrap();
    let mut sys = d.system.clone();
    sys.eps = &sys.eps * &Scalar::int(2);
    assert!(verify_zero_curvature(&lax, &sys, d.convention).unwrap() > 0);
}

#[test]
fn families_specialize_structurally() {
    let l = symbolic_lax(Family::L);
    let m = symbolic_lax(Family::M);
    let n = symbolic_lax(Family::N);
    let mf: Scalar = Symbol::Mfrak.into();
    let lm = l.specialize(Symbol::M1, &mf).specialize(Symbol::M2, &-&mf);
    assert_eq!(lm.l1, m.l1);
    assert_eq!(lm.l2, m.l2);
    let m0 = m.specialize(Symbol::Mfrak, &Scalar::zero());
    assert_eq!(m0.l1, n.l1);
    assert_eq!(m0.l2, n.l2);
}

#[test]
fn printed_constants_map_leaves_terms() {
    let sys = CNLSSystem::new(&KMatrix::symbolic(), eps());
    let rt = proposition_round_trip(&ConnectionAnsatz::standard(), &CoefficientSolution::printed(), &sys).unwrap();
    println!("{}", serde_json::to_string_pretty(&rt).unwrap());
    assert!(rt.mismatch > 0);
    let ok = proposition_round_trip(&ConnectionAnsatz::standard(), &CoefficientSolution::corrected(), &sys).unwrap();
    println!("{}", serde_json::to_string_pretty(&ok).unwrap());
    assert_eq!(ok.mismatch, 0);
}

#[test]
fn printed_constraints_agree_with_computed_ansatz() {
    let sol = CoefficientSolution::symbolic();
    let ansatz = ConnectionAnsatz::standard();
    let d = AnsatzDerivation::admissible(&ansatz, &sol).unwrap().remove(0);
    let sys = d.system.unwrap();
    let rep = verify_proposition(&sol, &sys).unwrap();
    println!("{}", serde_json::to_string_pretty(&rep).unwrap());
    assert!(rep.all_pass());
}
