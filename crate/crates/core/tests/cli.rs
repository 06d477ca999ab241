use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_periodic-drift"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

#[test]
fn simulate_localtime_posterior_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = cli(&["simulate", "--drift", "sin", "--T", "20", "--dt", "0.001", "--seed", "3", "--out", "p.csv"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let path = periodic_drift::io::read_path(d.join("p.csv")).unwrap();
    assert_eq!(path.steps(), 20_000);
    assert_eq!(path.dt(), 0.001);

    assert_eq!(code(&cli(&["localtime", "--path", "p.csv", "--grid", "32", "--out", "f.csv"], d)), 0);
    let (lt, chi) = periodic_drift::io::read_field(d.join("f.csv")).unwrap();
    assert_eq!(lt.len(), 32);
    assert!((lt.horizon() - 20.0).abs() < 1e-9);
    assert!((chi.mean() - path.final_value()).abs() <= 2.0 / 32.0);

    let args = ["posterior", "--path", "p.csv", "--p", "2", "--eta", "1", "--kappa", "1", "--nbasis", "8", "--grid", "32", "--out", "post.json"];
    assert_eq!(code(&cli(&args, d)), 0);
    let post = periodic_drift::io::read_posterior(d.join("post.json")).unwrap();
    assert_eq!(post.mean().len(), 8);
    assert_eq!(post.horizon(), lt.horizon());
}

#[test]
fn validation_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&cli(&["simulate", "--drift", "bogus", "--T", "1", "--dt", "0.1", "--seed", "1", "--out", "x.csv"], d)), 2);
    assert_eq!(code(&cli(&["simulate", "--drift", "sin", "--T", "-1", "--dt", "0.1", "--seed", "1", "--out", "x.csv"], d)), 2);
    assert_eq!(code(&cli(&["simulate", "--drift", "sin"], d)), 2);
    std::fs::write(d.join("bad.json"), r#"{"T_grid": [10, 5]}"#).unwrap();
    assert_eq!(code(&cli(&["experiment", "lln", "--config", "bad.json", "--out-dir", "o"], d)), 2);
    std::fs::write(d.join("typo.json"), r#"{"replicate": 3}"#).unwrap();
    assert_eq!(code(&cli(&["experiment", "lln", "--config", "typo.json", "--out-dir", "o"], d)), 2);
    assert_eq!(code(&cli(&["experiment", "nope", "--config", "bad.json", "--out-dir", "o"], d)), 2);
    assert_eq!(code(&cli(&["localtime", "--path", "missing.csv", "--grid", "32", "--out", "f.csv"], d)), 2);
}

#[test]
fn degenerate_posterior_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("t,x\n");
    for i in 0..=1000 {
        csv.push_str(&format!("{:.16e},0\n", i as f64 * 1e-3));
    }
    std::fs::write(d.join("flat.csv"), csv).unwrap();
    // all time at one point and a vanishing prior: the Galerkin matrix is numerically rank one
    let args = ["posterior", "--path", "flat.csv", "--p", "2", "--eta", "1e-300", "--kappa", "1", "--nbasis", "16", "--grid", "64", "--out", "z.json"];
    let out = cli(&args, d);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_rows_exit_with_code_four_and_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("huge.txt"), "# overflowing drift\n1e308\n1e308\n").unwrap();
    std::fs::write(
        d.join("cfg.json"),
        r#"{"drift": "huge.txt", "prior": {"p": 2, "eta": 1.0, "kappa": 1.0, "N": 8}, "T_grid": [5, 10], "dt": 0.01, "M": 32, "replicates": 2, "seed": 1}"#,
    )
    .unwrap();
    assert_eq!(code(&cli(&["experiment", "contraction", "--config", "cfg.json", "--out-dir", "out"], d)), 4);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failures"], 4);
    let csv = std::fs::read_to_string(d.join("out/contraction.csv")).unwrap();
    assert!(csv.starts_with("T,replicate,l2_error,hp_error,trace,status\n"));
}

#[test]
fn experiment_outputs_and_summary_schema() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.json"),
        r#"{"drift": "sin", "prior": {"p": 2, "eta": 1.0, "kappa": 1.0, "N": 8}, "T_grid": [10, 40], "dt": 0.01, "M": 32, "replicates": 3, "seed": 2, "output_dir": "elsewhere"}"#,
    )
    .unwrap();
    for kind in ["contraction", "lln", "fluctuation", "coverage"] {
        assert_eq!(code(&cli(&["experiment", kind, "--config", "cfg.json", "--out-dir", kind], d)), 0);
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d.join(kind).join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["experiment"], kind);
        assert_eq!(summary["config"]["T_grid"], serde_json::json!([10.0, 40.0]));
        assert_eq!(summary["config"]["output_dir"], kind);
        assert!(summary["version"].as_str().unwrap().contains(env!("CARGO_PKG_VERSION")));
        let rows = std::fs::read_to_string(d.join(kind).join(format!("{kind}.csv"))).unwrap();
        assert_eq!(rows.lines().count(), 1 + 2 * 3);
    }
}
