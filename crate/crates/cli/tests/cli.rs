use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn ppat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppat")).args(args).output().expect("run ppat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(name: &str) -> String {
    corpus(name).to_string_lossy().into_owned()
}

#[test]
fn firewire_family_is_proven() {
    let o = ppat(&["check", &path("firewire.ppg"), "--instances", "N=1..4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("verdict: proven"));
    assert!(out.contains("family: 010"), "{out}");
    for n in 1..=4 {
        assert!(out.contains(&format!("verified N={n}: 010 terminating")));
    }
}

#[test]
fn diverge_is_refuted_with_coin_free_loop() {
    let o = ppat(&["check", &path("diverge.ppg")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("== WITNESS"));
    assert!(out.contains("COINWORD: ε"), "{out}");
}

#[test]
fn randomwalk_with_oracle_agrees() {
    let o = ppat(&["check", &path("randomwalk.ppg"), "--instances", "N=1..5", "--oracle", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("== ORACLE"));
    assert!(!out.contains("agrees: no"));
}

#[test]
fn finite_program_reports_trace_and_pattern() {
    let o = ppat(&["check", &path("fw.ppg")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("round 3: candidate 01 -> terminating"), "{out}");
    assert!(out.contains("pattern: simple:01"));
}

#[test]
fn nondeterministic_program_gets_a_response() {
    let o = ppat(&["check", &path("nondet_echo.ppg")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("response: a0 1"));
}

#[test]
fn given_pattern_with_lasso_is_inconclusive() {
    let o = ppat(&["check", &path("rw.ppg"), "--instances", "N=5", "--pattern", "simple:000"]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("loop 111000"), "{out}");
    assert!(out.contains("COINWORD:"));
}

#[test]
fn given_template_is_checked_per_instance() {
    let o = ppat(&["check", &path("rw.ppg"), "--instances", "N=2..6", "--pattern", "template:a=;b=0;c=;d=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("N=6 word: 00000"));
}

#[test]
fn reports_are_byte_stable() {
    let args = ["check", &path("herman.ppg"), "--instances", "N=1..4", "--oracle", "--samples", "50", "--seed", "7"];
    let a = ppat(&args);
    let b = ppat(&args);
    assert_eq!(a.stdout, b.stdout);
    let jobs = ["--jobs", "1", "check", &path("herman.ppg"), "--instances", "N=1..4", "--oracle", "--samples", "50", "--seed", "7"];
    assert_eq!(ppat(&jobs).stdout, a.stdout);
}

#[test]
fn instrument_writes_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rw.ts");
    let o = ppat(&[
        "instrument",
        &path("rw.ppg"),
        "--pattern",
        "template:a=;b=0;c=;d=1",
        "--out",
        &out.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# invariant (advisory): next <= N"));
    assert!(text.contains("from: c2_choose guard: ctr <= 0 update: - to: c2_force"));
    assert!(text.lines().any(|l| l == "start: bot"));
}

#[test]
fn instrument_without_pattern_exports_nondet() {
    let o = ppat(&["instrument", &path("fw.ppg")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains(":=nondet"));
    assert!(!out.contains("ctr"));
}

#[test]
fn instrument_rejects_empty_word() {
    let o = ppat(&["instrument", &path("fw.ppg"), "--pattern", "seq:0,,1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn simulate_reports_fraction() {
    let o = ppat(&["simulate", &path("rw.ppg"), "--instances", "N=3", "--samples", "300"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("N=3 fraction: 1.000000"));
}

#[test]
fn simulate_nondet_needs_strategy() {
    assert_eq!(ppat(&["simulate", &path("nondet_echo.ppg")]).status.code(), Some(3));
    let o = ppat(&["simulate", &path("nondet_echo.ppg"), "--strategy", "a1", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn dump_and_print_succeed() {
    let o = ppat(&["dump", &path("rw.ppg"), "--instances", "N=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("top tau top"));
    let o = ppat(&["print", &path("fw.ppg")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("program fw;"));
    assert_eq!(ppat(&["print", &path("fw.ppg"), "--flowgraph"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(ppat(&["check", "/nonexistent/x.ppg"]).status.code(), Some(3));
    assert_eq!(ppat(&["check", &path("rw.ppg")]).status.code(), Some(3));
    assert_eq!(ppat(&["check", &path("rw.ppg"), "--instances", "N=5..1"]).status.code(), Some(3));
    assert_eq!(ppat(&["check", &path("fw.ppg"), "--pattern", "bogus"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ppg");
    std::fs::write(&bad, "program p; begin x := end").unwrap();
    assert_eq!(ppat(&["check", &bad.to_string_lossy()]).status.code(), Some(3));
}
