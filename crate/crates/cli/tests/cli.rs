use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kneser-lab"));
    c.env_remove("KNESER_LAB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kneser-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn quantities_for_petersen() {
    let v = json(&run(&["quantities", "--n", "5", "--k", "2", "--r", "2", "--p", "0.5"]));
    assert_eq!(v["quantities"]["N"], 4);
    assert_eq!(v["quantities"]["total_edges"], 15);
    // 30 pairs (Q, A), each spoiled by M = 2 edges.
    assert!((v["expected_Y"].as_f64().unwrap() - 7.5).abs() < 1e-9);
}

#[test]
fn sample_alpha_ystat_round_trip() {
    let dir = scratch("roundtrip");
    let path = dir.join("s.json");
    let p = path.to_str().unwrap();
    assert!(run(&["sample", "--n", "6", "--k", "2", "--r", "2", "--p", "1", "--seed", "3", "--out", p]).status.success());
    let alpha = json(&run(&["alpha", "--in", p]));
    assert_eq!(alpha["alpha"], 5);
    assert_eq!(alpha["status"], "exact");
    // At p = 1 no star union plus one vertex is independent.
    assert_eq!(json(&run(&["ystat", "--in", p]))["Y"], 0);
}

#[test]
fn sweep_writes_json_and_csv() {
    let dir = scratch("sweep");
    let config = dir.join("c.json");
    std::fs::write(
        &config,
        r#"{"params":{"n":7,"k":2,"r":2},"p_grid":[0.2,0.6],"trials_per_p":10,"master_seed":1,
            "sampler_kind":"explicit","solver_budget":1000000,"mode":"both"}"#,
    )
    .unwrap();
    let csv = dir.join("rows.csv");
    let v = json(&run(&["sweep", "--config", config.to_str().unwrap(), "--threads", "2", "--csv", csv.to_str().unwrap()]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,trials,n_alpha_eq_N,frac_success,wilson_lo,wilson_hi,mean_alpha,mean_Y,expected_Y,p_over_pc"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn sweep_rejects_unknown_config_keys() {
    let dir = scratch("badkey");
    let config = dir.join("c.json");
    std::fs::write(
        &config,
        r#"{"params":{"n":7,"k":2,"r":2},"p_grid":[0.2],"trials_per_p":1,"master_seed":1,
            "sampler_kind":"explicit","solver_budget":10,"mode":"both","extra":1}"#,
    )
    .unwrap();
    let out = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extra"));
}

#[test]
fn invalid_params_exit_with_two() {
    let out = run(&["quantities", "--n", "3", "--k", "2", "--r", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extremal_reports_lex_minimum() {
    let v = json(&run(&["extremal", "--n", "6", "--k", "2", "--r", "2", "--s", "7"]));
    assert_eq!(v["min_attained_by_lex"], true);
    assert_eq!(v["lex_edges"], v["min_edges"]);
}

#[test]
fn fast_verify_passes() {
    let out = run(&["verify", "--fast"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}
