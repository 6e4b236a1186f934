//! End-to-end checks of the binary: exit-code contract and the
//! self-consistency of emitted derivation files.

use std::process::Command;

fn ndml(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ndml"))
        .args(args)
        .output()
        .expect("run ndml");
    let text = String::from_utf8_lossy(&out.stdout).to_string()
        + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

#[test]
fn prove_emits_a_file_that_rechecks() {
    let dir = std::env::temp_dir().join("ndml-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t_proof.json");
    let (code, out) = ndml(&[
        "prove",
        "j1 <= []p0 |- j1 <= p0",
        "--sigma",
        "T",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{}", out);
    let (code, out) = ndml(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{}", out);
    assert!(out.contains("ok"));
}

#[test]
fn validate_reports_countermodels_with_exit_one() {
    let (code, out) = ndml(&["validate", "j1 <= p0 |- j1 <= q0", "--max-size", "2"]);
    assert_eq!(code, 1, "{}", out);
    assert!(out.contains("countermodel"));
    let (code, _) = ndml(&["validate", "j1 <= p0 |- j1 <= p0", "--max-size", "3"]);
    assert_eq!(code, 0);
}

#[test]
fn parse_errors_exit_two() {
    let (code, out) = ndml(&["prove", "j1 <= ("]);
    assert_eq!(code, 2, "{}", out);
}

#[test]
fn alba_prints_the_table_rule_for_transitivity() {
    let (code, out) = ndml(&["alba", "<><>p0 <= <>p0"]);
    assert_eq!(code, 0, "{}", out);
    assert!(out.contains("<>j1 <= m0 => <><>j1 <= m0"), "{}", out);
    assert!(out.contains("rule:"), "{}", out);
}

#[test]
fn cutelim_output_rechecks() {
    let corpus = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/pi1.json");
    let dir = std::env::temp_dir().join("ndml-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("pi1_cutfree.json");
    let (code, out) = ndml(&[
        "cutelim",
        corpus.to_str().unwrap(),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{}", out);
    let (code, out) = ndml(&["check", out_path.to_str().unwrap()]);
    assert_eq!(code, 0, "{}", out);
}
