use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_symcost");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn symcost(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("SYMCOST_SEED")
        .output()
        .expect("spawn symcost")
}

fn run_config(cfg: &Path, dir: &Path, extra_env: Option<(&str, &str)>) -> (Output, PathBuf, PathBuf) {
    let report = dir.join("r.jsonl");
    let summary = dir.join("s.csv");
    let mut cmd = Command::new(BIN);
    cmd.arg("run")
        .arg(cfg)
        .arg("--report")
        .arg(&report)
        .arg("--summary")
        .arg(&summary)
        .env_remove("SYMCOST_SEED");
    if let Some((k, v)) = extra_env {
        cmd.env(k, v);
    }
    (cmd.output().expect("spawn symcost"), report, summary)
}

fn write_config(dir: &Path, body: &Value) -> PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(&path, serde_json::to_string_pretty(body).unwrap()).unwrap();
    path
}

fn lines(report: &Path) -> Vec<Value> {
    std::fs::read_to_string(report)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn swap_plus(scale: Option<f64>) -> Value {
    let mut s = serde_json::json!({
        "id": "swap",
        "kind": "tradeoff",
        "parameters": {"implementation": "swap_plus", "ensemble": "plus_minus"},
        "seeds": [1, 2]
    });
    if let Some(x) = scale {
        s["inject_lhs_scale"] = x.into();
    }
    serde_json::json!({"schema": "symcost/1", "master_seed": 5, "scenarios": [s]})
}

#[test]
fn shipped_swap_plus_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report, summary) = run_config(&configs().join("swap_plus.json"), dir.path(), None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ls = lines(&report);
    assert_eq!(ls.len(), 3);
    for l in &ls {
        assert!(l["slack"].as_f64().unwrap() >= 0.0);
        assert_eq!(l["pass"], Value::Bool(true));
        assert_eq!(l["wall_time_ms"].as_f64(), Some(0.0));
    }
    let csv = std::fs::read_to_string(&summary).unwrap();
    assert_eq!(csv.lines().next(), Some("scenario_id,lhs,rhs,slack,pass"));
    assert_eq!(csv.lines().count(), 4);
    let mut meta = report.clone().into_os_string();
    meta.push(".meta.json");
    assert!(Path::new(&meta).exists());
}

#[test]
fn empty_scenario_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &serde_json::json!({"schema": "symcost/1", "scenarios": []}));
    let (out, report, _) = run_config(&cfg, dir.path(), None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no scenarios"));
    assert!(!report.exists());
}

#[test]
fn bad_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        serde_json::json!({"schema": "symcost/2", "scenarios": swap_plus(None)["scenarios"]}),
        serde_json::json!({"schema": "symcost/1", "scenarios": [{"id": "a", "kind": "petz", "seeds": [1]}]}),
        serde_json::json!({"schema": "symcost/1", "scenarios": [{"id": "a", "kind": "bogus", "seeds": [1]}]}),
        serde_json::json!({"schema": "symcost/1", "typo": 1, "scenarios": swap_plus(None)["scenarios"]}),
    ];
    for body in &cases {
        let cfg = write_config(dir.path(), body);
        let (out, _, _) = run_config(&cfg, dir.path(), None);
        assert_eq!(out.status.code(), Some(1), "{body}");
        let v = symcost(&["validate", cfg.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(1), "{body}");
    }
    let (out, _, _) = run_config(&dir.path().join("missing.json"), dir.path(), None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn injected_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &swap_plus(Some(1000.0)));
    let (out, report, summary) = run_config(&cfg, dir.path(), None);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    for l in lines(&report) {
        assert!(l["slack"].as_f64().unwrap() < 0.0);
        assert_eq!(l["pass"], Value::Bool(false));
    }
    assert!(std::fs::read_to_string(summary).unwrap().contains(",false"));
}

#[test]
fn validate_accepts_shipped_configs() {
    for name in ["swap_plus.json", "acceptance.json"] {
        let out = symcost(&["validate", configs().join(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("ok:"));
    }
}

#[test]
fn reports_are_reproducible_and_seed_overridable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &swap_plus(None));
    let read = |env| {
        let sub = tempfile::tempdir_in(dir.path()).unwrap();
        let (out, report, _) = run_config(&cfg, sub.path(), env);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(report).unwrap()
    };
    let a = read(None);
    assert_eq!(a, read(None));
    assert_eq!(a, read(Some(("SYMCOST_SEED", "5"))));
    let other = read(Some(("SYMCOST_SEED", "6")));
    assert_ne!(a, other);

    let (out, _, _) = run_config(&cfg, dir.path(), Some(("SYMCOST_SEED", "not-a-number")));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plot_extracts_sorted_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &swap_plus(None));
    let (out, report, _) = run_config(&cfg, dir.path(), None);
    assert_eq!(out.status.code(), Some(0));
    let p = symcost(&["plot", report.to_str().unwrap(), "--x", "fisher_B", "--y", "delta_irrev"]);
    assert_eq!(p.status.code(), Some(0));
    let text = String::from_utf8(p.stdout).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("fisher_B,delta_irrev"));
    let xs: Vec<f64> = rows.map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(xs.len(), 2);
    assert!(xs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn plot_keeps_report_order_for_equal_x() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    std::fs::write(
        &report,
        "{\"a\": 2, \"b\": 0}\n{\"a\": 1, \"extras\": {\"b\": 1}}\n{\"a\": 2, \"b\": 2}\n{\"a\": 1, \"b\": 3}\n",
    )
    .unwrap();
    let out_path = dir.path().join("p.csv");
    let p = symcost(&[
        "plot",
        report.to_str().unwrap(),
        "--x",
        "a",
        "--y",
        "b",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(p.status.code(), Some(0));
    let text = std::fs::read_to_string(out_path).unwrap();
    let ys: Vec<&str> = text.lines().skip(1).map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(ys, ["1", "3", "0", "2"]);
}

#[test]
fn plot_of_empty_report_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("empty.jsonl");
    std::fs::write(&report, "").unwrap();
    let p = symcost(&["plot", report.to_str().unwrap(), "--x", "fisher_B", "--y", "delta_irrev"]);
    assert_eq!(p.status.code(), Some(0));
    assert_eq!(String::from_utf8(p.stdout).unwrap().trim_end(), "fisher_B,delta_irrev");
}

#[test]
fn plot_rejects_missing_field() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    std::fs::write(&report, "{\"a\": 1}\n").unwrap();
    let p = symcost(&["plot", report.to_str().unwrap(), "--x", "a", "--y", "nope"]);
    assert_eq!(p.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&p.stderr).contains("nope"));
}
