//! CLI surface tests: exit codes, report schema, golden-file round trips and
//! report replay, driven through the built binary.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symcheck"))
}

fn json_of(stdout: &[u8]) -> serde_json::Value {
    serde_json::from_slice(stdout).expect("valid JSON on stdout")
}

#[test]
fn solve_sl3so3_reports_dim_14() {
    let out = bin()
        .args(["solve", "sl3so3", "--system", "prop3", "--orth", "--field", "qq"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json_of(&out.stdout);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["payload"]["dim"], 14);
    assert_eq!(v["payload"]["certified"], true);
}

#[test]
fn solve_gr32_orth_is_zero() {
    let out = bin()
        .args(["solve", "gr(3,2)", "--system", "prop3", "--orth"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json_of(&out.stdout);
    assert_eq!(v["payload"]["dim"], 0);
}

#[test]
fn unknown_space_is_a_usage_error() {
    let out = bin().args(["info", "nosuchspace"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_names_the_catalog() {
    let out = bin().args(["list"]).output().unwrap();
    let v = json_of(&out.stdout);
    let spaces = v["payload"]["spaces"].as_array().unwrap();
    assert!(spaces.iter().any(|s| s == "g2so4"));
}

#[test]
fn info_dumps_constants() {
    let out = bin().args(["info", "gr(3,2)"]).output().unwrap();
    let v = json_of(&out.stdout);
    assert_eq!(v["payload"]["n"], 6);
    assert_eq!(v["payload"]["sign"], 1);
    assert!(v["payload"]["nonzero_constants"].as_array().unwrap().len() > 0);
}

#[test]
fn validate_and_curvature_pass_on_catalog_sample() {
    for spec in ["cp(2)", "g2so4"] {
        let out = bin().args(["validate", spec]).output().unwrap();
        assert!(out.status.success(), "{spec}");
        let out = bin().args(["curvature", spec]).output().unwrap();
        assert!(out.status.success(), "{spec}");
        let v = json_of(&out.stdout);
        assert_eq!(v["payload"]["einstein"], true);
        assert_eq!(v["payload"]["weyl_tracefree"], true);
    }
}

#[test]
fn dump_matrix_round_trips_bit_exactly() {
    let dir = std::env::temp_dir().join("symcheck-golden-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path: PathBuf = dir.join("sl3so3.mat");
    let out = bin()
        .args([
            "solve",
            "sl3so3",
            "--system",
            "prop3",
            "--orth",
            "--field",
            "qq",
            "--dump-matrix",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read(&path).unwrap();
    let mat = symcheck::sparse::SparseMatrix::read_golden(&mut std::io::Cursor::new(&text)).unwrap();
    let mut again = Vec::new();
    mat.write_golden(&mut again).unwrap();
    assert_eq!(text, again);
    assert_eq!(mat.ncols, 100);
    // the dumped system solves to the same dimension
    let field = mat.entry_field().unwrap();
    assert_eq!(mat.nullspace(&field).unwrap().len(), 14);
}

#[test]
fn replay_reproduces_payloads() {
    let dir = std::env::temp_dir().join("symcheck-replay-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = bin()
        .args(["--out"])
        .arg(&path)
        .args(["roots", "gr(3,2)", "--seed", "5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin().args(["--replay"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let v = json_of(&out.stdout);
    assert_eq!(v["replay_match"], true);
}

#[test]
fn spin9_and_cochain_subcommands() {
    let out = bin().args(["spin9", "--check", "relations"]).output().unwrap();
    assert!(out.status.success());
    let out = bin()
        .args(["cochain", "gr(3,2)", "--check", "partial"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json_of(&out.stdout);
    assert_eq!(v["payload"]["adh_dim"], 4);
    let out = bin()
        .args(["cochain", "gr(3,2)", "--check", "derivations"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin()
        .args(["cochain", "cp(2)", "--check", "nabla-w"])
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn lemma3_subcommand() {
    let out = bin().args(["lemma3", "cp(2)"]).output().unwrap();
    assert!(out.status.success());
    let v = json_of(&out.stdout);
    assert_eq!(v["payload"]["dim"], 12);
    assert_eq!(v["payload"]["contains_ad_m"], true);
}
