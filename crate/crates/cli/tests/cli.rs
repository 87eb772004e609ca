use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

fn prolong(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prolong"))
        .args(args)
        .current_dir(dir)
        .env_remove("PROLONG_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))).unwrap()
}

fn soliton_config(eps: f64, dx: f64, x_end: f64, snapshot_every: usize) -> String {
    format!(
        r#"{{"grid": {{"period": 40.0, "n": 128}}, "eps": {eps}, "dx": {dx}, "x_end": {x_end},
 "snapshot_every": {snapshot_every},
 "initial": {{"type": "soliton", "eta": 1.0, "a": 0.5, "c": [[0.6, 0.0], [0.0, 0.8]], "t0": 0.0}}}}"#
    )
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut()
        .unwrap()
        .remove("timestamp_unix")
        .expect("timestamp present");
    v
}

#[test]
fn default_algebra_verify_matches_golden_report() {
    let tmp = TempDir::new().unwrap();
    let o = prolong(tmp.path(), &["algebra-verify", "--out", "report.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/relation_report.json");
    let expected = std::fs::read_to_string(golden).unwrap();
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("report.json")).unwrap(),
        expected
    );
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("2 at 20,21,22,23,24,25,26,28,29"), "{stdout}");
    let m = read_json(tmp.path().join("report.manifest.json"));
    assert_eq!(m["subcommand"], "algebra-verify");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn empty_relation_file_gives_empty_report() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "empty.jsonl", "");
    let o = prolong(
        tmp.path(),
        &["algebra-verify", "--relations", "empty.jsonl", "--out", "r.json"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(read_json(tmp.path().join("r.json"))["outcomes"], Value::Array(vec![]));
}

#[test]
fn malformed_relation_record_reports_line() {
    let tmp = TempDir::new().unwrap();
    let good = r#"{"tag": "01", "text": "[x1,x2] = 0", "lhs": [["1", ["x1", "x2"]]], "rhs": []}"#;
    write(tmp.path(), "bad.jsonl", &format!("{good}\n{{\"tag\": 3\n"));
    let o = prolong(tmp.path(), &["algebra-verify", "--relations", "bad.jsonl"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(
        read_json(tmp.path().join("relation_report.manifest.json"))["exit_code"],
        2
    );
}

#[test]
fn unwhitelisted_failure_exits_one() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "known.json", r#"{"relations": {}}"#);
    let o = prolong(tmp.path(), &["algebra-verify", "--known", "known.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("unexpected failures: 30, 31, 32, 33"));
}

#[test]
fn lax_derive_families() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        code(&prolong(
            tmp.path(),
            &["lax-derive", "--family", "N", "--out", "n.json"]
        )),
        0
    );
    assert_eq!(
        code(&prolong(
            tmp.path(),
            &["lax-derive", "--family", "M", "--out", "m.json"]
        )),
        0
    );
    let (n, m) = (
        read_json(tmp.path().join("n.json")),
        read_json(tmp.path().join("m.json")),
    );
    assert_eq!(n["coefficients"], m["coefficients"]);
    assert_eq!(n["residual_terms"], 0);
    assert_eq!(m["coupling"]["m1"], "m");
    assert_eq!(n["coupling"]["m1"], "0");
    assert!(m["x_rules"]["b1_x"].as_str().unwrap().contains("(i*m)*b1"));
    assert!(n["negative_control_terms"].as_u64().unwrap() > 0);
    assert_eq!(code(&prolong(tmp.path(), &["lax-derive", "--family", "X"])), 2);
}

#[test]
fn reruns_are_byte_identical_apart_from_timestamp() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write(dir, "sim.json", &soliton_config(2.0, 1e-3, 0.02, 5));
    let runs = [
        (
            vec!["lax-derive", "--family", "L", "--out", "d.json"],
            vec!["d.json"],
            "d.manifest.json",
        ),
        (
            vec!["algebra-verify", "--out", "a.json"],
            vec!["a.json"],
            "a.manifest.json",
        ),
        (
            vec!["simulate", "--config", "sim.json", "--out-prefix", "s"],
            vec!["s_trajectory.csv", "s_diagnostics.csv"],
            "s.manifest.json",
        ),
        (
            vec!["props", "--seed", "3", "--cases", "20", "--out", "p.json"],
            vec!["p.json"],
            "p.manifest.json",
        ),
    ];
    for (args, outputs, manifest) in runs {
        assert_eq!(code(&prolong(dir, &args)), 0, "{args:?}");
        let first: Vec<Vec<u8>> = outputs.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect();
        let m1 = without_timestamp(read_json(dir.join(manifest)));
        assert_eq!(code(&prolong(dir, &args)), 0);
        let second: Vec<Vec<u8>> = outputs.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect();
        assert_eq!(first, second, "{args:?}");
        assert_eq!(m1, without_timestamp(read_json(dir.join(manifest))), "{args:?}");
    }
}

#[test]
fn simulate_writes_monotone_diagnostics() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "sim.json", &soliton_config(2.0, 1e-3, 0.05, 10));
    let o = prolong(
        tmp.path(),
        &["simulate", "--config", "sim.json", "--out-prefix", "out/sol"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(tmp.path().join("out/sol_diagnostics.csv")).unwrap();
    let xs: Vec<f64> = rd.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(xs.len(), 51);
    assert!(xs.windows(2).all(|w| w[1] > w[0]));
    let m = read_json(tmp.path().join("out/sol.manifest.json"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_config_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "dx.json", &soliton_config(2.0, 0.0, 0.05, 0));
    write(tmp.path(), "neg.json", &soliton_config(-2.0, 1e-3, 0.05, 0));
    write(tmp.path(), "bad.json", "{\"grid\": ");
    for cfg in ["dx.json", "neg.json", "bad.json", "missing.json"] {
        assert_eq!(code(&prolong(tmp.path(), &["simulate", "--config", cfg])), 2, "{cfg}");
    }
}

#[test]
fn tight_power_tolerance_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = soliton_config(2.0, 1e-3, 0.05, 0).replacen('{', "{\"power_tolerance\": 0.0, ", 1);
    write(tmp.path(), "sim.json", &cfg);
    let o = prolong(tmp.path(), &["simulate", "--config", "sim.json"]);
    // Round-off drift is nonzero, so a zero tolerance fails the run.
    assert_eq!(code(&o), 1);
}

#[test]
fn monodromy_on_zero_and_soliton_trajectories() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let zero = r#"{"grid": {"period": 20.0, "n": 32}, "dx": 0.01, "x_end": 0.05, "snapshot_every": 1,
        "initial": {"type": "plane_wave", "amplitude": [[0.0, 0.0], [0.0, 0.0]]}}"#;
    write(dir, "zero.json", zero);
    assert_eq!(
        code(&prolong(
            dir,
            &["simulate", "--config", "zero.json", "--out-prefix", "z"]
        )),
        0
    );
    let o = prolong(
        dir,
        &[
            "monodromy",
            "--trajectory",
            "z_trajectory.csv",
            "--lambda",
            "0.2,-0.2",
            "--out",
            "z.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(dir.join("z.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    for lam in ["0.2", "-0.2"] {
        let tr: Vec<(&str, &str)> = rows.iter().filter(|r| &r[1] == lam).map(|r| (&r[2], &r[3])).collect();
        assert!(tr.windows(2).all(|w| w[0] == w[1]), "{tr:?}");
    }

    write(dir, "sol.json", &soliton_config(2.0, 1e-3, 0.1, 20));
    assert_eq!(
        code(&prolong(
            dir,
            &["simulate", "--config", "sol.json", "--out-prefix", "s"]
        )),
        0
    );
    let o = prolong(
        dir,
        &[
            "monodromy",
            "--trajectory",
            "s_trajectory.csv",
            "--lambda",
            "0.3",
            "--drift-bound",
            "1e-6",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.join("scan.manifest.json").exists());
}

#[test]
fn monodromy_input_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&prolong(dir, &["monodromy", "--trajectory", "missing.csv"])), 2);
    // Snapshots at x = 0, 0.01, 0.02, 0.025 are not uniformly spaced.
    write(dir, "sol.json", &soliton_config(2.0, 1e-3, 0.025, 10));
    assert_eq!(
        code(&prolong(
            dir,
            &["simulate", "--config", "sol.json", "--out-prefix", "s"]
        )),
        0
    );
    assert_eq!(
        code(&prolong(dir, &["monodromy", "--trajectory", "s_trajectory.csv"])),
        2
    );
    write(dir, "junk.csv", "x,t,re1\n1,2\n");
    assert_eq!(code(&prolong(dir, &["monodromy", "--trajectory", "junk.csv"])), 2);
}

#[test]
fn props_subcommand_is_seeded() {
    let tmp = TempDir::new().unwrap();
    let o = prolong(tmp.path(), &["props", "--seed", "11", "--cases", "50"]);
    assert_eq!(code(&o), 0);
    let rep = read_json(tmp.path().join("props.json"));
    assert_eq!(rep["diffpoly"]["seed"], 11);
    assert!(rep["loop_algebra"]["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["failures"] == 0));
}

#[test]
fn output_dir_override_applies_to_relative_paths() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("elsewhere");
    let o = Command::new(env!("CARGO_BIN_EXE_prolong"))
        .args(["lax-derive", "--family", "N", "--out", "n.json"])
        .current_dir(tmp.path())
        .env("PROLONG_OUTPUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(out.join("n.json").exists());
    assert!(out.join("n.manifest.json").exists());
    assert!(!tmp.path().join("n.json").exists());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Truncated or byte-flipped configs never crash the binary: they either
    /// run (0/1) or are rejected as input errors (2).
    #[test]
    fn corrupted_configs_map_to_contract_codes(cut in 0usize..200, flip in 0usize..200, byte in any::<u8>()) {
        let tmp = TempDir::new().unwrap();
        let text = soliton_config(2.0, 1e-3, 0.005, 0);
        let mut bytes = text.as_bytes().to_vec();
        let cut = cut.min(bytes.len() - 1);
        let truncated = &bytes[..cut];
        std::fs::write(tmp.path().join("cut.json"), truncated).unwrap();
        prop_assert_eq!(code(&prolong(tmp.path(), &["simulate", "--config", "cut.json"])), 2);

        let k = flip % bytes.len();
        bytes[k] = byte;
        std::fs::write(tmp.path().join("flip.json"), &bytes).unwrap();
        let c = code(&prolong(tmp.path(), &["simulate", "--config", "flip.json"]));
        prop_assert!(matches!(c, 0..=2), "exit {}", c);
    }
}
