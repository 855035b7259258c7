//! End-to-end tests of the command-line interface: each test spawns the
//! real binary and checks stdout plus the documented exit codes
//! (0 success, 1 negative verdict, 2 usage, 3 numeric domain).

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kontinued"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kontinued-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const PHI_MINUS_ONE: &str = "0.6180339887498948482045868343656381177203091798057628621354486227052604628189";
const SQRT2: &str = "1.4142135623730950488016887242096980785696718753769480731766797379907324784139";

#[test]
fn eval_certifies_golden_ratio() {
    let out = run(&["eval", "cf(1; b(n) = 1; a(n) = 1)", "--prec", "192"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("status  = converged"), "{text}");
    assert!(text.contains("1.6180339887498948"), "{text}");
}

#[test]
fn eval_unsettled_fraction_exits_one() {
    // b = −1, a = 1 cycles with period three and has no real limit
    let out = run(&["eval", "cf(0; b(n) = -1; a(n) = 1)", "--prec", "128"]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout_of(&out));
    assert!(!stdout_of(&out).contains("= converged"));
}

#[test]
fn eval_rejects_bad_literal() {
    let out = run(&["eval", "cf(1; oops)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_identity_passes() {
    let out = run(&["verify", "--id", "eq6", "--x", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("finite-termination"), "{text}");
    assert!(text.contains("verdict=pass"), "{text}");
}

#[test]
fn verify_accepts_symbolic_parameters() {
    let out = run(&["verify", "--id", "eq8", "--z", "pi/4", "--prec", "128"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("verdict=pass"));
}

#[test]
fn verify_domain_error_exits_three() {
    let out = run(&["verify", "--id", "eq9", "--alpha", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_without_id_or_suite_is_usage_error() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pslq_finds_phi_relation() {
    let phi = "1.6180339887498948482045868343656381177203091798057628621354486227052604628189";
    let phi_sq = "2.6180339887498948482045868343656381177203091798057628621354486227052604628189";
    let out = run(&["pslq", "1.0", phi, phi_sq, "--max-norm", "10", "--prec", "192"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("+1*x0 +1*x1 -1*x2"), "{}", stdout_of(&out));
}

#[test]
fn pslq_reports_exhaustion() {
    let out = run(&["pslq", "1.0", SQRT2, "--max-norm", "5", "--prec", "192"]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("no relation"), "{}", stdout_of(&out));
}

#[test]
fn db_build_lookup_and_mine_roundtrip() {
    let dir = temp_dir("db");
    let db = dir.join("base.tsv");
    let db_str = db.to_str().unwrap();

    let out = run(&["db", "build", "--out", db_str, "--prec", "192"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("entries"));

    let out = run(&[
        "db", "lookup", PHI_MINUS_ONE, "--db", db_str, "--prec", "128",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("confirmed:"), "{text}");
    assert!(text.contains("phi"), "{text}");

    let out = run(&[
        "mine",
        "--seed",
        "1",
        "--budget",
        "300",
        "--space",
        "tiny",
        "--db",
        db_str,
        "--prec-confirm",
        "192",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("CONFIRMED"), "{text}");
    assert!(text.contains("phi"), "{text}");

    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn config_file_changes_default_precision() {
    let dir = temp_dir("cfg");
    let cfg = dir.join("kontinued.conf");
    std::fs::write(&cfg, "# test configuration\ndefault-prec = 128\n").unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "eval",
        "cf(1; b(n) = 1; a(n) = 1)",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));
    // 128 bits carry (128−64)·log10(2) ≈ 19 trusted decimal digits
    assert!(stdout_of(&out).contains("(19 trusted digits)"), "{}", stdout_of(&out));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = temp_dir("badcfg");
    let cfg = dir.join("kontinued.conf");
    std::fs::write(&cfg, "not-a-key = 7\n").unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "eval",
        "cf(1; b(n) = 1; a(n) = 1)",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn threads_flag_is_accepted() {
    let out = bin()
        .args(["--threads", "2", "eval", "cf(1; b(n) = 1; a(n) = 1)", "--prec", "128"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
