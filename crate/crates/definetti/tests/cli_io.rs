//! CLI integration: fixture round trips and exit codes.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_definetti")
}

fn scratch(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("definetti-cli-{}-{label}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn example_outputs_parse_back_through_the_loaders() {
    let dir = scratch("roundtrip");
    for name in ["first", "g-jump", "g-complicated", "case-study"] {
        let out = dir.join(name);
        let status = Command::new(bin())
            .args(["example", name, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "example {name}");

        let model: definetti::coeffs::ModelSpec =
            serde_json::from_str(&std::fs::read_to_string(out.join("model.json")).unwrap())
                .unwrap();
        let model = definetti::DiffusionModel::from_spec(&model).unwrap();
        let profit: definetti::profit::ProfitSpec =
            serde_json::from_str(&std::fs::read_to_string(out.join("profit.json")).unwrap())
                .unwrap();
        let profit = definetti::ProfitRate::from_spec(&profit).unwrap();
        assert!(model.r > 0.0);
        assert!(profit.g_eval(0.0) > 0.0 || name == "case-study");
        assert!(out.join("psi.csv").exists());
        assert!(out.join("equilibrium.json").exists());
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn solve_writes_the_curve_and_reports_conditions() {
    let dir = scratch("solve");
    let model = dir.join("model.json");
    std::fs::write(&model, r#"{"r":0.08,"mu":"0.25*x","sigma":"2"}"#).unwrap();
    let curve = dir.join("curve.csv");
    let status = Command::new(bin())
        .args(["solve", "--model"])
        .arg(&model)
        .args(["--b", "5", "--xmax", "20", "--out"])
        .arg(&curve)
        .status()
        .unwrap();
    assert!(status.success());
    let body = std::fs::read_to_string(&curve).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "x,V,dV_left,dV_right,lambda");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 5);
    assert_eq!(first[1].parse::<f64>().unwrap(), 0.0); // V(0) = 0
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_model_file_exits_one() {
    let status = Command::new(bin())
        .args(["solve", "--model", "/nonexistent/model.json", "--b", "5"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn bad_usage_exits_one() {
    let status = Command::new(bin()).args(["solve"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn failed_conditions_exit_two_under_strict() {
    let dir = scratch("strict");
    let model = dir.join("model.json");
    // flat drift with r = 1: the candidate rate goes negative
    std::fs::write(&model, r#"{"r":1.0,"mu":"0","sigma":"2^0.5"}"#).unwrap();
    let status = Command::new(bin())
        .args(["solve", "--model"])
        .arg(&model)
        .args(["--b", "1", "--xmax", "10", "--strict"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // without --strict the command still succeeds
    let status = Command::new(bin())
        .args(["solve", "--model"])
        .arg(&model)
        .args(["--b", "1", "--xmax", "10"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn verify_equilibrium_small_run_passes() {
    let dir = scratch("verify");
    let model = dir.join("model.json");
    std::fs::write(&model, r#"{"r":0.08,"mu":"0.25*x","sigma":"2"}"#).unwrap();
    let out = dir.join("report.json");
    let status = Command::new(bin())
        .args(["verify", "equilibrium", "--model"])
        .arg(&model)
        .args([
            "--b", "5", "--x0", "5", "--xmax", "30", "--paths", "400", "--tmax", "60", "--dt",
            "2e-3", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert!(report["analytic"].as_f64().unwrap() > 0.0);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn check_reports_assumptions_and_admissibility() {
    let dir = scratch("check");
    let model = dir.join("model.json");
    std::fs::write(&model, r#"{"r":0.08,"mu":"0.25*x","sigma":"2"}"#).unwrap();
    let profit = dir.join("profit.json");
    std::fs::write(
        &profit,
        r#"{"pieces":[{"from":0.0,"expr":"0.5"},{"from":10.0,"expr":"1"}]}"#,
    )
    .unwrap();
    let out = dir.join("check.json");
    let status = Command::new(bin())
        .args(["check", "--model"])
        .arg(&model)
        .arg("--profit")
        .arg(&profit)
        .args(["--xmax", "20", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["assumptions"]["sigma_positive"], true);
    assert_eq!(report["assumptions"]["assumption2_c"], 0.1);
    assert_eq!(report["admissibility"]["verdict"], true);
    let intensity = report["admissibility"]["jump_points_above_b"][0]["intensity"]
        .as_f64()
        .unwrap();
    assert!((intensity - 1.0 / 3.0).abs() < 1e-12);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn simulate_accepts_strategy_files() {
    let dir = scratch("simfiles");
    let model = dir.join("model.json");
    std::fs::write(&model, r#"{"r":0.08,"mu":"0.25*x","sigma":"2"}"#).unwrap();
    let s1 = dir.join("s1.json");
    std::fs::write(
        &s1,
        r#"{"lambda":"0.1*x","skew":[],"jumps":{"intervals":[[12.0,null]],"map":"x-12"}}"#,
    )
    .unwrap();
    let s2 = dir.join("s2.json");
    std::fs::write(&s2, r#"{"lambda":"0"}"#).unwrap();
    let out = dir.join("summary.json");
    let status = Command::new(bin())
        .args(["simulate", "--model"])
        .arg(&model)
        .arg("--strategy1")
        .arg(&s1)
        .arg("--strategy2")
        .arg(&s2)
        .args([
            "--x0", "5", "--xmax", "30", "--paths", "50", "--tmax", "5", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["n_paths"], 50);
    // lone rate extractor: player 2 collects nothing
    assert_eq!(report["payoff_player2"]["mean"], 0.0);
    assert!(report["payoff_player1"]["mean"].as_f64().unwrap() > 0.0);
    let _ = std::fs::remove_dir_all(&dir);
}
