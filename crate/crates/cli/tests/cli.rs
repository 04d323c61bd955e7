//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hallot() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hallot"))
}

fn run(args: &[&str]) -> Output {
    hallot().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        !output.stdout.is_empty(),
        "no stdout; stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn check_serial_dictatorship_reports_all_axioms_hold() {
    let output = run(&[
        "check",
        "--mechanism",
        "sd",
        "--priority",
        "1,2,3",
        "--n",
        "3",
        "--axioms",
        "sp,gctb,iplb",
        "--no-meta",
    ]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    assert_eq!(report["command"], "check");
    let items = report["items"].as_array().unwrap();
    assert_eq!(items.len(), 3);
    assert!(items.iter().all(|i| i["holds"] == true));
    assert!(report.get("version").is_none());
    assert!(report.get("wall_time_ms").is_none());
}

#[test]
fn check_ex1_fails_strategy_proofness_with_witness() {
    let output = run(&["check", "--mechanism", "ex1", "--n", "3", "--axioms", "sp"]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    let item = &report["items"][0];
    assert_eq!(item["holds"], false);
    assert_eq!(item["witness"]["kind"], "manipulation");
    assert_eq!(item["witness"]["agent"], 3);
}

#[test]
fn expectation_flags_gate_the_exit_code() {
    let failing = run(&[
        "check",
        "--mechanism",
        "ex1",
        "--axioms",
        "sp",
        "--expect",
        "holds",
    ]);
    assert_eq!(failing.status.code(), Some(1));
    let passing = run(&[
        "check",
        "--mechanism",
        "ex1",
        "--axioms",
        "sp",
        "--expect",
        "fails",
    ]);
    assert_eq!(passing.status.code(), Some(0));
}

#[test]
fn independence_matrix_passes_as_one_command() {
    let output = run(&["independence", "--no-meta"]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    let rows = report["items"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    for row in rows {
        for cell in row["cells"].as_array().unwrap() {
            assert_eq!(cell["ok"], true, "mismatch in {row}");
        }
    }
}

#[test]
fn search_cross_validates_and_counts() {
    let output = run(&[
        "search",
        "--n",
        "2",
        "--axioms",
        "sp,gctb",
        "--expect-family",
        "serial",
        "--expect-count",
        "2",
        "--no-meta",
    ]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    let item = &report["items"][0];
    assert_eq!(item["count"], 2);
    assert_eq!(item["cross_validated"], true);
    assert_eq!(item["complete"], true);

    let wrong_count = run(&[
        "search",
        "--n",
        "2",
        "--axioms",
        "sp,gctb",
        "--expect-count",
        "3",
    ]);
    assert_eq!(wrong_count.status.code(), Some(1));
}

#[test]
fn characterize_round_trips_a_written_table() {
    let dir = std::env::temp_dir().join(format!("hallot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let table_path = dir.join("sd_213.json");
    let output = run(&[
        "materialize",
        "--mechanism",
        "sd",
        "--priority",
        "2,1,3",
        "-o",
        table_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());

    let output = run(&[
        "characterize",
        "--table",
        table_path.to_str().unwrap(),
        "--no-meta",
    ]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    let item = &report["items"][0];
    assert_eq!(item["family"], "serial");
    assert_eq!(item["priority"], serde_json::json!([2, 1, 3]));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn characterize_constant_table_reports_none_with_mismatch() {
    let output = run(&["characterize", "--mechanism", "constant", "--n", "3", "--no-meta"]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    let item = &report["items"][0];
    assert_eq!(item["family"], "none");
    assert_eq!(item["certificate"]["kind"], "mismatch");
}

#[test]
fn identical_invocations_are_byte_identical_without_meta() {
    let args = [
        "check",
        "--mechanism",
        "gctb_not_pareto",
        "--axioms",
        "gctb,pareto,neutrality",
        "--no-meta",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn varpop_proposition_holds_for_extended_dictatorship() {
    let output = run(&[
        "varpop",
        "--mechanism",
        "extended-sd",
        "--priority",
        "1,2,3",
        "--verify",
        "proposition",
        "--expect-true",
        "--no-meta",
    ]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    assert_eq!(report["items"][0]["overall"], true);

    let failing = run(&[
        "varpop",
        "--mechanism",
        "size-split",
        "--verify",
        "consistency",
        "--expect-true",
    ]);
    assert_eq!(failing.status.code(), Some(1));
}

#[test]
fn eval_reports_the_dictatorship_outcome() {
    let dir = std::env::temp_dir().join(format!("hallot-eval-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let profile = dir.join("profile.txt");
    std::fs::write(&profile, "1: b > a > c\n2: b > c > a\n3: a > b > c\n").unwrap();
    let output = run(&[
        "eval",
        "--mechanism",
        "sd",
        "--priority",
        "1,2,3",
        "--profile",
        profile.to_str().unwrap(),
        "--no-meta",
    ]);
    assert!(output.status.success());
    let report = stdout_json(&output);
    assert_eq!(
        report["items"][0]["allocation"],
        serde_json::json!(["b", "c", "a"])
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_with_actionable_messages() {
    let unknown_axiom = run(&["check", "--mechanism", "sd", "--axioms", "nope"]);
    assert_eq!(unknown_axiom.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&unknown_axiom.stderr);
    assert!(stderr.contains("unknown axiom"));
    assert!(stderr.contains("gctb"), "lists valid names: {stderr}");

    let unknown_mechanism = run(&["check", "--mechanism", "nope", "--axioms", "sp"]);
    assert_eq!(unknown_mechanism.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown_mechanism.stderr).contains("ex1_sp_violation"));

    let dir = std::env::temp_dir().join(format!("hallot-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad_table = dir.join("bad.json");
    std::fs::write(&bad_table, "{not json").unwrap();
    let malformed = run(&["characterize", "--table", bad_table.to_str().unwrap()]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&malformed.stderr).contains("parsing table file"));

    let bad_profile = dir.join("bad.txt");
    std::fs::write(&bad_profile, "1: a > b\nwat\n").unwrap();
    let parse_error = run(&[
        "eval",
        "--mechanism",
        "sd",
        "--n",
        "2",
        "--profile",
        bad_profile.to_str().unwrap(),
    ]);
    assert_eq!(parse_error.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse_error.stderr).contains("line 2"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn profile_cap_env_var_overrides_the_default() {
    let output = hallot()
        .args(["check", "--mechanism", "sd", "--n", "3", "--axioms", "sp"])
        .env("HALLOT_PROFILE_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("cap of 100"), "{stderr}");

    let raised = hallot()
        .args(["check", "--mechanism", "sd", "--n", "3", "--axioms", "sp"])
        .env("HALLOT_PROFILE_CAP", "1000")
        .output()
        .unwrap();
    assert!(raised.status.success());
}

#[test]
fn table_files_produced_by_materialize_parse_back(
) {
    let output = run(&["materialize", "--mechanism", "ex2_bossy"]);
    assert!(output.status.success());
    // stdout carries the table JSON on the first line, then the report.
    let text = String::from_utf8(output.stdout).unwrap();
    let first_line = text.lines().next().unwrap();
    let table: Value = serde_json::from_str(first_line).unwrap();
    assert_eq!(table["n"], 3);
    assert_eq!(table["objects"], serde_json::json!(["o1", "o2", "o3"]));
    assert_eq!(table["entries"].as_array().unwrap().len(), 216);
    assert!(Path::new(env!("CARGO_BIN_EXE_hallot")).exists());
}
