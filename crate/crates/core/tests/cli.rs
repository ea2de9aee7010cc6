use std::path::Path;
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_fubini-crit");

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().expect("spawn");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, text) = run(args);
    (code, serde_json::from_str(&text).expect("json output"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn quadric_diag_one_two() {
    let (code, doc) = run_json(&["quadric", "--diag", "1,2", "--verify"]);
    assert_eq!(code, 0);
    let pts = doc["body"]["critical_points"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    assert_eq!(pts[0]["point"], serde_json::json!([[1.0, 0.0], [0.0, 0.0]]));
    assert_eq!(pts[0]["index"], 1);
    assert_eq!(pts[1]["point"], serde_json::json!([[0.0, 0.0], [1.0, 0.0]]));
    assert_eq!(pts[1]["index"], 2);
    assert_eq!(doc["body"]["match"], true);
    assert_eq!(doc["header"]["command"], "quadric");
}

#[test]
fn quadric_matrix_file_and_degenerate_input() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "q.txt", "1 0 0 0 0 0\n0 0 2 0 0 0\n0 0 0 0 3 0\n");
    let (code, doc) = run_json(&["quadric", "--matrix", &m, "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(doc["body"]["critical_points"].as_array().unwrap().len(), 3);
    assert_eq!(doc["body"]["match"], true);

    let (code, _) = run(&["quadric", "--diag", "1,1"]);
    assert_eq!(code, 1);
    let bad = write(dir.path(), "bad.txt", "1 0 2\n");
    assert_eq!(run(&["quadric", "--matrix", &bad]).0, 1);
}

#[test]
fn solve_fermat_cubic_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "f.txt", "# Z1^3 - Z0^3\n1 3\n0 3 1 0\n3 0 -1 0\n");
    let (code, doc) = run_json(&["solve", "--section", &s]);
    assert_eq!(code, 0);
    let report = &doc["body"]["report"];
    assert_eq!(report["criticals"].as_array().unwrap().len(), 5);
    assert_eq!(report["certified_complete"], true);
    assert_eq!(doc["footer"]["summary"]["by_index"], serde_json::json!([0, 3, 2]));
}

#[test]
fn bad_section_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "bad.txt", "1 3\n0 2 1 0\n");
    assert_eq!(run(&["solve", "--section", &s]).0, 1);
    assert_eq!(run(&["solve", "--section", "/nonexistent/file"]).0, 1);
    assert_eq!(run(&["solve", "--n", "1"]).0, 1);
}

#[test]
fn sample_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.txt");
    let p = path.to_str().unwrap();
    assert_eq!(run(&["sample", "--n", "2", "--m", "3", "--seed", "9", "--out", p]).0, 0);
    let (code, from_file) = run_json(&["solve", "--section", p]);
    let (code2, from_seed) = run_json(&["solve", "--n", "2", "--m", "3", "--seed", "9"]);
    assert_eq!((code, code2), (0, 0));
    assert_eq!(from_file["body"], from_seed["body"]);
}

#[test]
fn gauss_lucas_campaign_has_no_violations() {
    let (code, doc) = run_json(&["gauss-lucas", "--trials", "1000", "--m", "4", "--seed", "1"]);
    let summary = &doc["footer"]["summary"];
    assert_eq!(summary["violations"], 0);
    assert_eq!(summary["trials"], 1000);
    assert_eq!(summary["index2_in_pinf"], 1000);
    let rate = summary["hemisphere_acceptance_rate"].as_f64().unwrap();
    assert!(rate > 0.1 && rate <= 1.0, "{rate}");
    assert!(code == 0 || code == 2);
    assert_eq!(doc["body"]["trials"].as_array().unwrap().len(), 1000);
}

#[test]
fn gauss_lucas_rejects_closed_hemisphere_input() {
    let dir = tempfile::tempdir().unwrap();
    // zeros at 1, ω, ω² cover the equator evenly
    let s = write(dir.path(), "c.txt", "1 3\n0 3 1 0\n3 0 -1 0\n");
    assert_eq!(run(&["gauss-lucas", "--section", &s]).0, 1);
    let ok = write(dir.path(), "ok.txt", "1 2\n0 2 1 0\n1 1 -3 0\n2 0 2 0\n");
    let (code, doc) = run_json(&["gauss-lucas", "--section", &ok]);
    assert_eq!(code, 0);
    assert_eq!(doc["footer"]["summary"]["violations"], 0);
}

#[test]
fn morse_outputs() {
    let (code, doc) = run_json(&["morse", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(doc["body"]["holds"], true);
    assert_eq!(doc["body"]["middle_betti"], 2);
    let (code, csv) = run(&["morse", "--n", "1", "--format", "tabular"]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("series,degree,coefficient\n"));
}

#[test]
fn density_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["density", "--n", "1", "--m", "3", "--trials", "40", "--seed", "7"];
    let args = |jobs: &str, out: &Path| -> Vec<String> {
        let mut v: Vec<String> = base.iter().map(|s| s.to_string()).collect();
        v.extend(["--jobs".into(), jobs.into(), "--out".into(), out.to_str().unwrap().into()]);
        v
    };
    let code = |v: Vec<String>| Command::new(BIN).args(v).status().unwrap().code();
    let (c1, first) = run(&[&base[..], &["--jobs", "2"]].concat());
    let (c2, second) = run(&[&base[..], &["--jobs", "2"]].concat());
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(first, second);

    assert_eq!(code(args("2", &a)), Some(0));

    assert_eq!(code(args("1", &b)), Some(0));
    let da: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    let db: Value = serde_json::from_slice(&std::fs::read(&b).unwrap()).unwrap();
    assert_eq!(da["body"], db["body"]);
    assert_eq!(da["footer"], db["footer"]);
    assert_eq!(da["footer"]["summary"]["degenerate_trials"], 0);
    let by_index = da["body"]["by_index"].as_array().unwrap();
    assert_eq!(by_index.len(), 3);
}

#[test]
fn tabular_export_has_one_point_per_row() {
    let (code, csv) = run(&["solve", "--n", "1", "--m", "4", "--seed", "3", "--format", "tabular"]);
    assert_eq!(code, 0);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "kind,index,residual,nondeg_margin,multiplicity,z0_re,z0_im,z1_re,z1_im");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().all(|r| r.split(',').count() == 9));
    assert_eq!(rows.iter().filter(|r| r.starts_with("zero")).count(), 4);
}
