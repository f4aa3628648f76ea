//! Golden tests: run the binary on checked-in game files and compare
//! output and exit codes against frozen expectations.

use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_delgame"))
        .args(args)
        .env("DELGAME_BUDGET", "50000000")
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap_or(-1),
    )
}

fn golden(args: &[&str], expected_file: &str, expected_code: i32) {
    let mut full = Vec::new();
    full.extend_from_slice(args);
    let (stdout, stderr, code) = run(&full);
    let combined = format!("{stdout}{stderr}");
    let expected = std::fs::read_to_string(data(expected_file)).expect("expected output file");
    assert_eq!(combined, expected, "output mismatch for {args:?}");
    assert_eq!(code, expected_code, "exit code mismatch for {args:?}");
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn check_reports_hypotheses_and_classification() {
    golden(&["check", &path("reveal.game")], "reveal.check.out", 3);
}

#[test]
fn fold_public_quotient_with_sidecar() {
    golden(
        &["fold", &path("trivial_announce.game"), "public"],
        "trivial_announce.fold.out",
        0,
    );
}

#[test]
fn fold_propositional_parity_cycle() {
    golden(&["fold", &path("parity.game"), "prop"], "parity.fold.out", 0);
}

#[test]
fn fold_refuses_hypothesis_violations() {
    let (_, stderr, code) = run(&["fold", &path("reveal.game"), "prop"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("indistinguishable"), "stderr: {stderr}");
}

#[test]
fn announce_solver_wins_and_prints_strategy() {
    golden(
        &["solve", &path("learn.game"), "--engine", "announce"],
        "learn.announce.out",
        0,
    );
}

#[test]
fn announce_solver_reports_losses() {
    golden(
        &["solve", &path("learn_lose.game"), "--engine", "announce"],
        "learn_lose.announce.out",
        1,
    );
}

#[test]
fn oracle_reports_bounded_unknowns() {
    golden(
        &["solve", &path("unknown.game"), "--engine", "oracle"],
        "unknown.oracle.out",
        2,
    );
}

#[test]
fn reach_engine_on_the_quotient() {
    golden(&["solve", &path("learn.game"), "--engine", "reach"], "learn.reach.out", 0);
}

#[test]
fn reach_engine_refuses_invalid_presentations() {
    let (_, stderr, code) = run(&["solve", &path("reveal.game"), "--engine", "reach"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("H3"), "stderr: {stderr}");
}

#[test]
fn parse_errors_exit_with_input_code() {
    let (_, stderr, code) = run(&["check", &path("empty.game")]);
    assert_eq!(code, 4);
    assert!(stderr.contains("empty game file"));
}

#[test]
fn subjective_mode_and_flags_are_accepted() {
    let (stdout, _, code) = run(&[
        "solve",
        &path("learn.game"),
        "--engine",
        "announce",
        "--mode",
        "subjective",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict: WIN"));

    // strict leaf mode agrees on the verdict
    let (stdout, _, code) = run(&[
        "solve",
        &path("learn.game"),
        "--engine",
        "announce",
        "--strict-leaves",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict: WIN"));

    // restricted knowledge scope is accepted by the oracle
    let (stdout, _, code) = run(&[
        "solve",
        &path("learn.game"),
        "--engine",
        "oracle",
        "--k-scope",
        "init",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("verdict: WIN"));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["fold", &path("trivial_announce.game"), "public"]);
    let b = run(&["fold", &path("trivial_announce.game"), "public"]);
    assert_eq!(a, b);
    let a = run(&["solve", &path("learn.game"), "--engine", "oracle"]);
    let b = run(&["solve", &path("learn.game"), "--engine", "oracle"]);
    assert_eq!(a, b);
}

#[test]
fn dot_files_are_written() {
    let dir = std::env::temp_dir().join("delgame-golden");
    std::fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("quotient.dot");
    let (stdout, _, code) = run(&[
        "fold",
        &path("trivial_announce.game"),
        "public",
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("dot:"));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph arena {"));
    let sidecar = dir.join("quotient.sidecar.txt");
    assert!(std::fs::read_to_string(sidecar).unwrap().contains("position p0"));
}
