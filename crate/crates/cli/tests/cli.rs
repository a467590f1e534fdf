//! Exit-code and file-output behavior of the command-line interface.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ifit"))
}

fn test_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("ifit_cli_tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config(dir: &std::path::Path, seed: u64) -> PathBuf {
    let path = dir.join("config.json");
    let cfg = format!(
        r#"{{"n_init": 200, "n_elite": 30, "nfit_local": 400, "nadd_global": 60, "nadd_local": 10, "seed": {seed}}}"#
    );
    std::fs::write(&path, cfg).unwrap();
    path
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = bin()
        .args(["fit", "--model", "logit", "--out", "/tmp/nope.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--config"), "{stderr}");
}

#[test]
fn unknown_model_is_a_usage_error() {
    let dir = test_dir("unknown_model");
    let cfg = small_config(&dir, 1);
    let out = bin()
        .args(["fit", "--model", "gamma-ray", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("r.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown model"));
}

#[test]
fn bad_config_json_is_a_usage_error() {
    let dir = test_dir("bad_config");
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let out = bin()
        .args(["fit", "--model", "logit", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("r.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_writes_result_and_diagnose_reads_it_back() {
    let dir = test_dir("fit_logit");
    let cfg = small_config(&dir, 7);
    let result_path = dir.join("result.json");
    let trace_path = dir.join("trace.csv");
    let scores_path = dir.join("scores.csv");

    let out = bin()
        .args(["fit", "--model", "logit", "--config"])
        .arg(&cfg)
        .args(["--seed", "7", "--out"])
        .arg(&result_path)
        .arg("--trace-csv")
        .arg(&trace_path)
        .arg("--scores-csv")
        .arg(&scores_path)
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "stderr: {stderr}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("estimate:"), "{stdout}");
    assert!(stdout.contains("exactly identified"), "{stdout}");

    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result_path).unwrap()).unwrap();
    assert_eq!(result["estimate"].as_array().unwrap().len(), 4);
    assert_eq!(result["std_scores"].as_array().unwrap().len(), 4);
    assert!(result["sh_pvalue"].is_null());
    assert!(result["n_simulations"].as_u64().unwrap() >= 200);

    // Trace CSV: header plus one row per engine iteration.
    let trace = std::fs::read_to_string(&trace_path).unwrap();
    let n_rows = trace.lines().count() - 1;
    assert_eq!(n_rows, result["trace"].as_array().unwrap().len());
    // Scores CSV: one row per statistic.
    let scores = std::fs::read_to_string(&scores_path).unwrap();
    assert_eq!(scores.lines().count(), 1 + 4);

    let diag = bin().args(["diagnose", "--result"]).arg(&result_path).output().unwrap();
    assert_eq!(diag.status.code(), Some(0));
    let text = String::from_utf8_lossy(&diag.stdout);
    assert!(text.contains("standardized summary scores"), "{text}");
    assert!(text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count() >= 4);
}

#[test]
fn toad_fit_emits_three_parameters_and_88_scores() {
    let dir = test_dir("fit_toad");
    let cfg_path = dir.join("config.json");
    std::fs::write(
        &cfg_path,
        r#"{"n_init": 400, "n_elite": 100, "nfit_local": 400, "nadd_global": 80, "nadd_local": 10}"#,
    )
    .unwrap();
    let result_path = dir.join("result.json");
    let out = bin()
        .args(["fit", "--model", "toad", "--config"])
        .arg(&cfg_path)
        .args(["--seed", "7", "--out"])
        .arg(&result_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result_path).unwrap()).unwrap();
    assert_eq!(result["estimate"].as_array().unwrap().len(), 3);
    assert_eq!(result["std_scores"].as_array().unwrap().len(), 88);
    assert_eq!(result["sh_df"].as_u64(), Some(85));
}

#[test]
fn non_convergence_exits_with_code_two() {
    let dir = test_dir("non_convergence");
    let cfg_path = dir.join("config.json");
    std::fs::write(
        &cfg_path,
        r#"{"n_init": 200, "n_elite": 30, "nfit_local": 400, "nadd_global": 60, "nadd_local": 10, "max_local_iters": 2, "seed": 3}"#,
    )
    .unwrap();
    let out = bin()
        .args(["fit", "--model", "logit", "--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(dir.join("r.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exec_model_without_obs_is_a_usage_error() {
    let dir = test_dir("exec_no_obs");
    let cfg = small_config(&dir, 1);
    let out = bin()
        .args(["fit", "--model", "exec:/bin/true", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("r.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--obs"));
}

#[test]
fn mcerr_rejects_degenerate_study_sizes() {
    let dir = test_dir("mcerr_bad");
    let cfg = small_config(&dir, 1);
    let out = bin()
        .args(["mcerr", "--model", "logit", "--datasets", "1", "--repeats", "5", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_small_run_prints_metrics_and_writes_report() {
    let dir = test_dir("bench_small");
    let cfg = small_config(&dir, 11);
    let report_path = dir.join("report.json");
    let out = bin()
        .args(["bench", "--model", "logit", "--reps", "3", "--seed", "11", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("AMS:"), "{stdout}");
    assert!(stdout.contains("AARE:"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["replications"].as_u64(), Some(3));
    assert_eq!(report["model"].as_str(), Some("logit"));
}
