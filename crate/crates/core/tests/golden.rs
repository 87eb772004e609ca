//! Symbolic reports compared byte for byte against checked-in files.
//! Set `UPDATE_GOLDEN=1` to rewrite them after an intended change.

use std::path::PathBuf;

use prolong_core::loop_algebra::{
    check_relations, default_candidates, search_conventions, standard_relations, MappingTable,
};
use prolong_core::zero_curvature::{CoefficientSolution, DerivationReport};

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(
        actual,
        expected,
        "{} differs; rerun with UPDATE_GOLDEN=1 if intended",
        path.display()
    );
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

#[test]
fn default_relation_report() {
    let rep = check_relations(&MappingTable::standard(1, 1), &standard_relations()).unwrap();
    golden("relation_report.json", &pretty(&rep));
}

#[test]
fn search_best_table() {
    let res = search_conventions(
        &MappingTable::standard(1, 1),
        &standard_relations(),
        &default_candidates(),
    )
    .unwrap();
    let prefactors: Vec<String> = res.best.prefactors.iter().map(ToString::to_string).collect();
    assert_eq!(prefactors, ["1", "1", "1", "1", "3", "3*i"]);
    golden("search_best.json", &pretty(&res));
}

#[test]
fn derivation_report() {
    let rep = DerivationReport::build(CoefficientSolution::corrected().constants_map()).unwrap();
    golden("derivation_report.json", &pretty(&rep));
}

#[test]
fn proposition_round_trips() {
    use prolong_core::diffpoly::{CNLSSystem, KMatrix};
    use prolong_core::zero_curvature::{proposition_round_trip, ConnectionAnsatz};
    let sys = CNLSSystem::new(&KMatrix::symbolic(), prolong_core::Symbol::Epsilon.into());
    let ansatz = ConnectionAnsatz::standard();
    let trips: Vec<_> = [CoefficientSolution::printed(), CoefficientSolution::corrected()]
        .iter()
        .map(|s| proposition_round_trip(&ansatz, s, &sys).unwrap())
        .collect();
    golden("round_trip.json", &pretty(&trips));
}
