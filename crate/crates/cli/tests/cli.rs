//! End-to-end checks of the command-line interface: flag handling,
//! report shapes, exit statuses and the sweep grid.

use std::io::Write as _;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_indosc"))
}

#[test]
fn construct_baseline_document() {
    let out = bin()
        .args(["construct", "--p", "invsq:0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["m1"], 1);
    let c1 = doc["amplitudes"][0]["c"].as_f64().unwrap();
    assert!((c1 - 5e-3).abs() < 1e-15, "{c1}");
    assert!(doc["underflow_horizon"].as_u64().unwrap() >= 8);
}

#[test]
fn construct_ratio_violation_exits_nonzero() {
    let out = bin().args(["construct", "--alpha", "192"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("RatioViolation"), "{err}");
}

#[test]
fn table_p_with_negative_entry_is_rejected() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "1.0 0.05").unwrap();
    writeln!(file, "10.0 -0.01").unwrap();
    writeln!(file, "20.0 0.0").unwrap();
    let out = bin()
        .args(["construct", "--p"])
        .arg(format!("table:{}", file.path().display()))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("NegativeCoefficient"), "{err}");
}

#[test]
fn solve_csv_header_is_exact() {
    let out = bin()
        .args(["solve", "--m-hi", "2", "--format", "csv", "--p", "invsq:0.1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("has a header row");
    assert_eq!(
        header,
        "s,z,h,residual_ode1,residual_class0,identity_defect,envelope"
    );
    // Sign pattern is visible at rows just past the switch points.
    let row_near = |a: f64| {
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("s,"))
            .map(|l| {
                let cols: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
                cols
            })
            .min_by(|x, y| {
                (x[0] - a).abs().partial_cmp(&(y[0] - a).abs()).unwrap()
            })
            .unwrap()
    };
    let pi = std::f64::consts::PI;
    assert!(row_near(2.0 * pi)[1] < 0.0, "z < 0 near a_2");
    assert!(row_near(3.0 * pi)[1] > 0.0, "z > 0 near a_3");
    assert!(row_near(2.0 * pi)[2] > 0.0, "h > 0 near a_2");
    assert!(row_near(3.0 * pi)[2] < 0.0, "h < 0 near a_3");
}

#[test]
fn solve_json_and_csv_agree() {
    let json_out = bin()
        .args(["solve", "--m-hi", "1", "--p", "invsq:0.1"])
        .output()
        .unwrap();
    let csv_out = bin()
        .args(["solve", "--m-hi", "1", "--p", "invsq:0.1", "--format", "csv"])
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    let samples = doc["samples"].as_array().unwrap();
    let csv = String::from_utf8(csv_out.stdout).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("s,"))
        .collect();
    assert_eq!(samples.len(), rows.len());
    for (sample, row) in samples.iter().zip(&rows) {
        let cols: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        for (i, key) in [
            "s",
            "z",
            "h",
            "residual_ode1",
            "residual_class0",
            "identity_defect",
            "envelope",
        ]
        .iter()
        .enumerate()
        {
            assert_eq!(sample[*key].as_f64().unwrap(), cols[i], "{key}");
        }
    }
}

#[test]
fn certify_clamps_m_lo_to_first_constructed_index() {
    // s0 = 8 puts m1 at 2; a request starting at m = 1 silently starts
    // at the first index where the forcing exists.
    let out = bin()
        .args(["certify", "--s0", "8", "--m-lo", "1", "--m-hi", "3"])
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["meta"]["m1"], 2);
    assert_eq!(doc["per_m"][0]["m"], 2);
}

#[test]
fn certify_deep_range_reports_out_of_precision_entries() {
    let out = bin()
        .args(["certify", "--m-hi", "12", "--p", "invsq:0.1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "still certified overall");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"]["status"], "certified");
    assert!(!doc["meta"]["warnings"].as_array().unwrap().is_empty());
    let statuses: Vec<&str> = doc["per_m"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["status"].as_str().unwrap())
        .collect();
    assert!(statuses.contains(&"out-of-precision"));
    assert!(statuses.iter().filter(|s| **s == "ok").count() >= 8);
}

#[test]
fn sweep_grid_verdicts_follow_ratio_and_multiplier() {
    let out = bin()
        .args([
            "sweep",
            "--ratios",
            "150,193,200,400",
            "--eps-multipliers",
            "0.5,0.9,1.1",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("ratio,"))
        .collect();
    assert_eq!(rows.len(), 12);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let ratio: f64 = cols[0].parse().unwrap();
        let mult: f64 = cols[1].parse().unwrap();
        let verdict = cols[4];
        let theory = cols[5];
        let expect_certified = ratio > 192.0 && mult < 1.0;
        assert_eq!(
            verdict == "certified",
            expect_certified,
            "ratio {ratio}, multiplier {mult}: verdict {verdict}"
        );
        assert_eq!(
            theory == "guaranteed",
            expect_certified,
            "ratio {ratio}, multiplier {mult}: theory {theory}"
        );
    }
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "alpha = 200\nbeta = 1\nepsilon = 2.5e-5\np = invsq:0.1\nm-hi = 3\nformat = csv\n",
    )
    .unwrap();
    let out = bin()
        .args(["certify", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# p: invsq:0.1"));
    assert_eq!(
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("m,"))
            .count(),
        3
    );
}

#[test]
fn compare_detects_a_changed_body() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.json");
    let status = bin()
        .args(["certify", "--m-hi", "2", "--out", reference.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    // A different epsilon changes the data body; --compare must exit 1.
    let status = bin()
        .args([
            "certify",
            "--m-hi",
            "2",
            "--epsilon",
            "2.4e-5",
            "--compare",
            reference.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!status.status.success());
    let err = String::from_utf8_lossy(&status.stderr);
    assert!(err.contains("comparison failed"), "{err}");
}
