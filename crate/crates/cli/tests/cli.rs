//! Drives the built binary end to end: exit codes, certificate round trips,
//! model checking.

use std::process::{Command, Output};

fn comu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_comu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn sat_exit_codes() {
    let out = comu(&["sat", "--logic", "k", "p & ~p"]);
    assert_eq!(code(&out), 20);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "UNSAT");

    let out = comu(&["sat", "--logic", "k", "p"]);
    assert_eq!(code(&out), 10);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "SAT");

    let out = comu(&["sat", "--logic", "k", "mu X. X"]);
    assert_eq!(code(&out), 1, "unguarded input is a usage error");

    let out = comu(&["sat", "--logic", "k", "p &"]);
    assert_eq!(code(&out), 1, "parse errors exit 1");
}

#[test]
fn coalition_example_via_cli() {
    let out = comu(&[
        "sat",
        "--logic",
        "coalition:3",
        "[{1}] (nu X. p & <{1,2,3}> X) & [{2}] (mu Y. ~p | [{2}] Y)",
    ]);
    assert_eq!(code(&out), 20);
}

#[test]
fn emit_and_certify_round_trip() {
    let dir = std::env::temp_dir().join("comu-cli-test-cert");
    std::fs::create_dir_all(&dir).unwrap();
    let tableau = dir.join("t.json");
    let formula = "(box p) & dia ~p";
    let out = comu(&[
        "sat",
        "--logic",
        "k",
        formula,
        "--emit-tableau",
        tableau.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 20);
    let out = comu(&["certify", tableau.to_str().unwrap(), formula, "--logic", "k"]);
    assert_eq!(code(&out), 0);

    // a certificate for a different formula is rejected
    let out = comu(&["certify", tableau.to_str().unwrap(), "p & ~p", "--logic", "k"]);
    assert_eq!(code(&out), 1);

    // tampering with a label is caught
    let text = std::fs::read_to_string(&tableau).unwrap();
    let tampered = text.replacen("box p", "dia ~p", 1);
    assert_ne!(text, tampered);
    let bad = dir.join("bad.json");
    std::fs::write(&bad, tampered).unwrap();
    let out = comu(&["certify", bad.to_str().unwrap(), formula, "--logic", "k"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn emit_model_then_check() {
    let dir = std::env::temp_dir().join("comu-cli-test-model");
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("m.json");
    let formula = "nu X. p & dia X";
    let out = comu(&[
        "sat",
        "--logic",
        "k",
        formula,
        "--emit-model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 10);
    let out = comu(&["check", model.to_str().unwrap(), formula]);
    assert_eq!(code(&out), 0);
    let listed = String::from_utf8_lossy(&out.stdout);
    assert!(listed.contains("s0"), "root state listed: {listed}");
    // the game-based checker agrees
    let out = comu(&["check", model.to_str().unwrap(), formula, "--via-game"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("s0"));
}

#[test]
fn check_self_loop_example() {
    let dir = std::env::temp_dir().join("comu-cli-test-check");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("loop.json");
    std::fs::write(
        &path,
        r#"{"kind":"kripke","states":["w"],"valuation":{"p":["w"]},"transitions":{"w":["w"]}}"#,
    )
    .unwrap();
    let out = comu(&["check", path.to_str().unwrap(), "nu X. p & dia X"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "w");
    // formula p lists exactly the valuation
    let out = comu(&["check", path.to_str().unwrap(), "p"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "w");
    // malformed model JSON is a usage error
    std::fs::write(&path, "{").unwrap();
    let out = comu(&["check", path.to_str().unwrap(), "p"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn formula_from_file() {
    let dir = std::env::temp_dir().join("comu-cli-test-file");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.txt");
    std::fs::write(&path, "nu X. box X\n").unwrap();
    let arg = format!("@{}", path.display());
    let out = comu(&["sat", "--logic", "k", &arg]);
    assert_eq!(code(&out), 10);
}

#[test]
fn audits_via_cli() {
    for logic in ["k", "monotone", "coalition:2"] {
        let out = comu(&["onestep-audit", "--logic", logic, "--samples", "60"]);
        assert_eq!(code(&out), 0, "{logic} audit failed");
    }
    // a zero coefficient bound breaks graded completeness, which the audit
    // must report with a nonzero exit
    let out = comu(&[
        "onestep-audit",
        "--logic",
        "graded",
        "--samples",
        "60",
        "--coeff-bound",
        "0",
    ]);
    assert_eq!(code(&out), 1);
}
