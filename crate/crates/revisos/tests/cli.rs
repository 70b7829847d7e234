//! End-to-end runs of the binary: exit codes and output shapes.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_revisos"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

#[test]
fn check_reports_types_and_recursion() {
    let out = bin()
        .args(["check"])
        .arg(fixture("map_swap.iso"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("swap : 1 * (1 + 1) <-> (1 + 1) * 1"));
    assert!(stdout.contains("structurally recursive, decreasing argument 1"));
}

#[test]
fn check_rejects_non_structural_recursion() {
    for f in ["loop.iso", "cantor.iso"] {
        let out = bin().args(["check"]).arg(fixture(f)).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{f} must fail the check");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(
            stderr.contains("not structurally recursive"),
            "{f}: {stderr}"
        );
    }
}

#[test]
fn check_json_diagnostics() {
    let out = bin()
        .args(["check", "--json"])
        .arg(fixture("swap.iso"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON diagnostics");
    assert_eq!(v["defs"][0]["name"], "swap");
    assert_eq!(v["defs"][0]["od"], "ok");
}

#[test]
fn run_defaults_to_main() {
    let out = bin().args(["run"]).arg(fixture("map_swap.iso")).output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "fold (injr ((injr (), ()), fold (injl ())))"
    );
}

#[test]
fn run_prints_the_value() {
    let out = bin()
        .args(["run"])
        .arg(fixture("swap.iso"))
        .args(["-e", "swap ((), injl ())"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "(injl (), ())");
}

#[test]
fn run_compiled_successor_on_zero() {
    let out = bin()
        .args(["run"])
        .arg(fixture("succ.iso"))
        .args(["-e", "succ (injl ())"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "injr (injl (fold (injl ())))"
    );
}

#[test]
fn run_out_of_fuel_exits_two() {
    let out = bin()
        .args(["run"])
        .arg(fixture("succ.iso"))
        .args(["-e", "succ (succ (succ (injl ())))", "--fuel", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fuel exhausted"));
}

#[test]
fn run_emits_trace_lines() {
    let out = bin()
        .args(["run"])
        .arg(fixture("swap.iso"))
        .args(["-e", "swap ((), injl ())", "--trace"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let first = stderr.lines().next().expect("one trace line");
    let v: serde_json::Value = serde_json::from_str(first).expect("JSON trace line");
    assert_eq!(v["rule"], "IsoApp");
    assert!(v["step"].is_u64());
    assert!(v["path"].is_array());
}

#[test]
fn invert_round_trips_through_check() {
    let out = bin()
        .args(["invert"])
        .arg(fixture("map_swap.iso"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let printed = String::from_utf8_lossy(&out.stdout);
    // The inverse source must itself parse and check.
    let tmp = std::env::temp_dir().join("revisos_inverted.iso");
    std::fs::write(&tmp, printed.as_bytes()).unwrap();
    let check = bin().args(["check"]).arg(&tmp).output().unwrap();
    assert!(
        check.status.success(),
        "inverted source failed the check: {}",
        String::from_utf8_lossy(&check.stderr)
    );
}

#[test]
fn rpp_eval_iterator() {
    let out = bin()
        .args(["rpp", "eval", "It[S]", "2", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "5 3");
}

#[test]
fn rpp_compile_swap_text() {
    let out = bin().args(["rpp", "compile", "Swap"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("{ (x, y) <-> (y, x) }"));
}

#[test]
fn rpp_compiled_source_checks_and_runs() {
    let out = bin()
        .args(["rpp", "compile", "It[S] ; Sign || Id"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let tmp = std::env::temp_dir().join("revisos_compiled.iso");
    std::fs::write(&tmp, &out.stdout).unwrap();
    let check = bin().args(["check"]).arg(&tmp).output().unwrap();
    assert!(check.status.success());
}

#[test]
fn rpp_test_agrees() {
    let out = bin()
        .args(["rpp", "test", "If[S, Id, P]", "--trials", "40"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("40 trials agree"));
}

#[test]
fn proof_extract_matches_golden() {
    let out = bin()
        .args(["proof", "extract"])
        .arg(fixture("swap.iso"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/swap_proof.json"),
    )
    .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), golden);
}

#[test]
fn proof_extract_raw_keeps_exchange_rules() {
    let out = bin()
        .args(["proof", "extract", "--raw"])
        .arg(fixture("swap.iso"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"rule\": \"ex\""));
}

#[test]
fn proof_validate_reports_thread() {
    let out = bin()
        .args(["proof", "validate"])
        .arg(fixture("map_swap.iso"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("map_swap: valid"));
    assert!(stdout.contains("thread weight"));
}

#[test]
fn proof_simulate_agrees() {
    let out = bin()
        .args(["proof", "simulate"])
        .arg(fixture("swap.iso"))
        .args(["-e", "swap ((), injl ())"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("checkpoints agreed"));
}

#[test]
fn missing_file_exits_three() {
    let out = bin()
        .args(["check", "/nonexistent/nope.iso"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
