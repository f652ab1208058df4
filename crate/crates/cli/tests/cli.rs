//! End-to-end checks of the command-line surface: artifact layout, CSV
//! schemas, JSON summaries and exit codes.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ebc"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ebc-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn dtn_table_emits_the_multiplier_csv() {
    let dir = temp_dir("dtn");
    let status = bin()
        .args([
            "dtn-table",
            "--geometry",
            "sphere",
            "--R1",
            "1.0",
            "--L",
            "4",
            "--h",
            "2.0",
        ])
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.join("dtn_table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("mode,lambda,multiplier"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[2], "-0.5");
    assert_eq!(csv.lines().count(), 6);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn solve_commands_write_solution_and_manifest() {
    let dir = temp_dir("solve");
    let config = dir.join("run.json");
    std::fs::write(
        &config,
        r#"{"R1": 1.0, "L": 2, "Nb": 24, "Nc": 4, "dt": 1e-2, "T": 0.1,
            "sigma": 0.01, "mu": 1.0, "delta": 0.05,
            "u0": "constant:0.5", "sample_times": [0.0, 0.1],
            "ebc": "robin", "alpha": 1.0}"#,
    )
    .unwrap();
    for sub in ["solve-full", "solve-effective"] {
        let status = bin()
            .arg(sub)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&dir)
            .status()
            .unwrap();
        assert!(status.success(), "{sub} failed");
    }
    let csv = std::fs::read_to_string(dir.join("solution_full.csv")).unwrap();
    assert!(csv.starts_with("t,l,rho,value\n"));
    // 2 samples × 3 modes × 29 nodes + header
    assert_eq!(csv.lines().count(), 1 + 2 * 3 * 29);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest_full.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["R1"], 1.0);
    assert!(manifest["norms"].as_array().unwrap().len() == 2);
    assert!(dir.join("solution_effective.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn eigen_and_steady_report_json_summaries() {
    let dir = temp_dir("eigen");
    let config = dir.join("run.json");
    std::fs::write(
        &config,
        r#"{"R1": 2.0, "L": 2, "Nb": 64, "ebc": "dirichlet", "k": 1.0}"#,
    )
    .unwrap();
    let output = bin()
        .args(["eigen", "--problem", "effective"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("eigen prints a JSON summary");
    let lambda = summary["lambda"].as_f64().unwrap();
    let expected = std::f64::consts::PI.powi(2) / 4.0;
    assert!((lambda - expected).abs() < 1e-2 * expected);
    assert!(dir.join("eigenfunction.csv").exists());

    let output = bin()
        .args(["steady", "--problem", "effective"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(summary["exists"], serde_json::json!(false));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_writes_report_and_bad_input_maps_to_exit_codes() {
    let dir = temp_dir("sweep");
    let config = dir.join("run.json");
    std::fs::write(
        &config,
        r#"{"R1": 1.0, "L": 1, "Nb": 16, "Nc": 2, "dt": 2e-2, "T": 0.1,
            "u0": "constant:0", "samples": 2}"#,
    )
    .unwrap();
    let status = bin()
        .args(["sweep", "--cells", "a0-g0,a1-g0", "--deltas", "0.1,0.05"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("cell,delta,sigma,mu,sup_error,terminal_error,steady_gap,wall_time\n"));
    assert_eq!(csv.lines().count(), 5);
    assert!(!csv.contains('\r'));
    assert!(dir.join("sweep_manifest.json").exists());

    // parameter-domain problems exit with code 2
    let status = bin()
        .args(["sweep", "--cells", "not-a-cell", "--deltas", "0.1"])
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lifespan_rejects_short_horizons() {
    let dir = temp_dir("lifespan");
    let status = bin()
        .args(["lifespan", "--cell", "a0-g0", "--t-long", "5"])
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}
