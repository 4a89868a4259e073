//! Smoke tests of the `erlab` binary and its exit codes.

use std::path::Path;
use std::process::{Command, Output};

use excess_risk_lab::io::{write_risk_rows, RiskRow};

fn erlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erlab")).args(args).output().unwrap()
}

fn write_planted(path: &Path, slope: f64) {
    let rows: Vec<RiskRow> = [128u64, 256, 512, 1024, 2048]
        .iter()
        .flat_map(|&n| {
            (0..3).map(move |s| RiskRow {
                excess_risk: 0.5 * (n as f64).powf(slope),
                se_excess: 0.0,
                ..RiskRow::failed(n, s, 10, 3)
            })
        })
        .collect();
    write_risk_rows(path, &rows).unwrap();
}

#[test]
fn curves_and_calibration_tables() {
    let out = erlab(&["curves", "--alpha", "1", "--n-min", "10", "--n-max", "1000", "--points", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,value,kind,alpha\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 3);
    assert!(text.contains(",phi_upper,"));

    let out = erlab(&["calib-table", "--points", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("eta,H,H_minus,psi_theta\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn fit_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    write_planted(&good, -0.22);
    let out = erlab(&["fit", "--input", good.to_str().unwrap(), "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["fit"]["slope"].as_f64().unwrap() + 0.22).abs() < 1e-9);

    let bad = dir.path().join("bad.csv");
    write_planted(&bad, -0.5);
    assert_eq!(
        erlab(&["fit", "--input", bad.to_str().unwrap(), "--alpha", "1"]).status.code(),
        Some(2)
    );

    let missing = dir.path().join("missing.csv");
    assert_eq!(
        erlab(&["fit", "--input", missing.to_str().unwrap(), "--alpha", "1"]).status.code(),
        Some(1)
    );
}

#[test]
fn dist_check_writes_its_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = dir.path().join("check.toml");
    std::fs::write(
        &config,
        format!(
            "bayes_draws = 20000\nmargin_draws = 20000\nexport_samples = 10\noutput_dir = {:?}\n[distribution]\nd = 2\nq = 2\nalpha = 1.0\nm = 2\nw = 0.1\nr = 1.0\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = erlab(&["dist-check", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for file in ["margin_cdf.csv", "dist_check.json", "samples.csv"] {
        assert!(out_dir.join(file).exists(), "{file}");
    }
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["bayes_exact"].as_f64().unwrap(), 0.45);
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "seeds = 1\n").unwrap();
    assert_eq!(erlab(&["sweep", "--config", config.to_str().unwrap()]).status.code(), Some(1));
}
