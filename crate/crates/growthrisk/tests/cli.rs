use std::fs;
use std::path::Path;

use growthrisk::figures::{read_csv, reproduce_figures, FigureConfig, FIGURE_ALPHAS};
use growthrisk::run;
use growthrisk_core::optimizer::solve_var;
use growthrisk_core::{MarketParams, Structure};
use serde_json::Value;

fn argv(cmd: &str) -> Vec<String> {
    std::iter::once("growthrisk".to_string()).chain(cmd.split_whitespace().map(str::to_string)).collect()
}

fn run_in(dir: &Path, cmd: &str) -> i32 {
    run(argv(&cmd.replace("{dir}", dir.to_str().unwrap())))
}

#[test]
fn solve_writes_thresholds_and_risk() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_in(dir.path(), "solve --measure es --alpha 0.05 --lambda 1 --r 0.05 --theta 0.4 --T 1 --x0 1 --out {dir}/sol.json");
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sol.json")).unwrap()).unwrap();
    assert_eq!(v["structure"], "ES_CLOSED_FORM");
    assert!(v["thresholds"]["xi_upper"].as_f64().unwrap() > v["thresholds"]["xi_lower"].as_f64().unwrap());
    assert!(v["risk"].is_f64() && v["expected_log_return"].is_f64());
    assert!((v["budget"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(v["payoff_table"].as_array().unwrap().len(), 201);
    assert_eq!(v["sign_discrepancy"], false);
}

#[test]
fn min_var_solution_has_infinite_expected_log_return() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "solve --measure var --alpha 0.05 --lambda 0 --out {dir}/s.json"), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["expected_log_return"], "-inf");
    assert_eq!(v["structure"], "VAR_CLOSED_FORM");
    assert!((v["thresholds"]["level"].as_f64().unwrap() - 1.1766986796).abs() < 1e-9);
}

#[test]
fn frontier_csv_has_grid_plus_kelly() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_in(dir.path(), "frontier --measure var --alpha 0.05 --lambda-grid 0.1:10:50log --out {dir}/f.csv");
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,risk,expected_log_return");
    assert_eq!(lines.len(), 52);
    assert!(lines[51].starts_with("inf,"));
    let (_, rows) = read_csv(&dir.path().join("f.csv")).unwrap();
    assert!(rows.iter().all(|r| r[1].is_finite() && r[2].is_finite()));
    assert!(lines[1].split(',').all(|f| f.contains('e')));
}

#[test]
fn frontier_writes_minus_inf_literal() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "frontier --measure var --alpha 0.05 --lambda-grid 0:1:3lin --out {dir}/f.csv"), 0);
    let text = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",-inf"));
}

#[test]
fn envelope_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "envelope --measure var --alpha 0.05 --lambda 1 --points 500 --out {dir}/e.csv"), 0);
    let (header, rows) = read_csv(&dir.path().join("e.csv")).unwrap();
    assert_eq!(header, ["s", "phi_left", "delta", "delta_prime"]);
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
    assert!(rows.iter().all(|r| r[2] <= r[1] + 1e-12));
}

#[test]
fn custom_measure_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.toml");
    fs::write(&cfg, "measure = \"custom\"\natoms = [[0.05, 0.5]]\nsegments = [[0.0, 0.1, 5.0]]\nlambda = 0.5\n").unwrap();
    let code = run_in(dir.path(), "solve --config {dir}/m.toml --points 11 --out {dir}/s.json");
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["structure"], "GENERAL");
    assert_eq!(v["lambda"], 0.5);
    // flags override the file
    assert_eq!(run_in(dir.path(), "solve --config {dir}/m.toml --lambda 2 --points 3 --out {dir}/t.json"), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(v["lambda"], 2.0);
    // a general solution has no closed-form policy
    assert_eq!(run_in(dir.path(), "path --config {dir}/m.toml --out {dir}/p"), 1);
}

#[test]
fn path_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_in(dir.path(), "path --measure es --alpha 0.05 --lambda 1 --n-paths 4 --n-steps 200 --record-every 50 --seed 3 --out {dir}/p");
    assert_eq!(code, 0);
    let (header, rows) = read_csv(&dir.path().join("p/paths.csv")).unwrap();
    assert_eq!(header, ["path_id", "t", "xi_t", "wealth", "pi"]);
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[0][1..4], [0.0, 1.0, 1.0]);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("p/summary.json")).unwrap()).unwrap();
    assert_eq!(v["n_paths"], 4);
    assert_eq!(v["excluded"], 0);
    assert!(v["relative_rmse"].as_f64().unwrap() < 0.05);
    assert_eq!(v["terminal"].as_array().unwrap().len(), 4);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "solve --measure es --alpha 0.05 --lambda 1 --bogus 3"), 1);
    assert_eq!(run_in(dir.path(), "solve --measure es --alpha 1.5 --lambda 1 --out {dir}/x.json"), 1);
    assert_eq!(run_in(dir.path(), "solve --measure es --lambda 1 --out {dir}/x.json"), 1);
    assert_eq!(run_in(dir.path(), "solve --measure es --alpha 0.05 --lambda -1 --out {dir}/x.json"), 1);
    assert_eq!(run_in(dir.path(), "solve --measure es --alpha 0.05 --lambda 1 --theta 0 --out {dir}/x.json"), 1);
    assert_eq!(run_in(dir.path(), "frontier --measure es --alpha 0.05 --lambda-grid 1:2 --out {dir}/x.csv"), 1);
    assert_eq!(run_in(dir.path(), "solve --config {dir}/missing.toml"), 1);
    assert_eq!(run_in(dir.path(), "verify --suite nonsense"), 1);
    assert_eq!(run_in(dir.path(), "launch"), 1);
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn verify_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "verify --suite quick --seed 42 --out {dir}/v.json"), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["name"] == "budget" && c["passed"] == true));
}

#[test]
fn figures_are_reproducible_and_shaped() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run_in(a.path(), "figures --out {dir}"), 0);
    let files = reproduce_figures(&FigureConfig::standard(b.path())).unwrap();
    assert_eq!(files.len(), 10);
    for f in &files {
        let name = f.file_name().unwrap();
        assert_eq!(fs::read(f).unwrap(), fs::read(a.path().join(name)).unwrap(), "{name:?}");
    }

    let p = MarketParams::with_theta(0.05, 0.4, 0.2, 1.0, 1.0).unwrap();
    // VaR payoffs jump at ξ_α; ES payoffs are continuous
    let (_, var) = read_csv(&a.path().join("fig2_var_payoff.csv")).unwrap();
    let (_, es) = read_csv(&a.path().join("fig5_es_payoff.csv")).unwrap();
    for (j, &alpha) in FIGURE_ALPHAS.iter().enumerate() {
        let Structure::VarClosedForm(th) = solve_var(alpha, 1.0, &p).unwrap().structure() else { panic!() };
        let col = 2 + j;
        let biggest = |rows: &[Vec<f64>]| {
            rows.windows(2)
                .map(|w| ((w[0][col] - w[1][col]).abs() / w[0][col].max(w[1][col]), w[0][0], w[1][0]))
                .fold((0.0, 0.0, 0.0), |m, x| if x.0 > m.0 { x } else { m })
        };
        let (jump, lo, hi) = biggest(&var);
        assert!(jump > 0.1 && lo <= th.xi_alpha && th.xi_alpha <= hi, "α={alpha}: {jump} at [{lo}, {hi}]");
        assert!(biggest(&es).0 < 0.05);
    }
    // frontiers at the reference parameters, Kelly endpoint last per α
    let (header, rows) = read_csv(&a.path().join("fig6_es_frontier.csv")).unwrap();
    assert_eq!(header, ["alpha", "lambda", "risk", "expected_log_return"]);
    assert_eq!(rows.len(), 3 * 52);
    let kelly: Vec<&Vec<f64>> = rows.iter().filter(|r| r[1].is_infinite()).collect();
    assert_eq!(kelly.len(), 3);
    assert!(kelly.iter().all(|r| (r[3] - 0.13).abs() < 1e-12));
    // the VaR envelope at λ = 1 has a single affine bridge
    let (_, env) = read_csv(&a.path().join("envelope_var_lambda1.csv")).unwrap();
    let below: Vec<bool> = env.iter().map(|r| r[2] < r[1] - 1e-9).collect();
    let runs = below.windows(2).filter(|w| w[1] && !w[0]).count() + usize::from(below[0]);
    assert_eq!(runs, 1);
}

#[test]
fn binary_output_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_growthrisk");
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = std::process::Command::new(bin)
            .args(["frontier", "--measure", "es", "--alpha", "0.05", "--lambda-grid", "0.1:10:8log"])
            .env("GROWTH_RISK_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 10);
    let bad = std::process::Command::new(bin).args(["solve", "--nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Usage"));
}
