use std::path::Path;
use std::process::{Command, Output};

use fkmg::fsd::parse_csv;

fn fkmg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkmg")).args(args).output().unwrap()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn coeffs_dump_has_the_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = fkmg(&[
        "coeffs",
        "--alpha",
        "0.5",
        "--nu",
        "1",
        "--N",
        "4",
        "--rho-re",
        "1",
        "--tau",
        "0.25",
        "--out",
        path_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1].l_k, -0.5);
    assert!((rows[1].re_d_k - (-0.25f64).exp() * -0.5).abs() < 1e-16);
}

#[test]
fn table_without_timing_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = fkmg(&["table", "--alpha", "0.8", "--M", "8,16,32", "--no-timing", "--out", path_arg(p)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("M,error,rate,iter,cpu_s"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "8");
    assert_eq!(first[2], "");
    assert_eq!(first[4], "0.0000e+00");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn table_reads_json_config_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"preset": "example-6.1", "alpha": 0.3, "nu": 2, "M": [8, 16], "coarsen": "geometric", "timing": false}"#,
    )
    .unwrap();
    let o = fkmg(&["table", "--config", path_arg(&cfg), "--M", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("16,"));
}

#[test]
fn invalid_input_exits_with_validation_code() {
    assert_eq!(fkmg(&["table", "--M", "48"]).status.code(), Some(1));
    assert_eq!(fkmg(&["table", "--alpha", "1.5", "--M", "8"]).status.code(), Some(1));
    assert_eq!(fkmg(&["coeffs", "--alpha", "0.5", "--nu", "9", "--N", "3"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"alpah": 0.3}"#).unwrap();
    let o = fkmg(&["table", "--config", path_arg(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpah"));
}

#[test]
fn non_convergence_exits_with_code_two() {
    let o = fkmg(&["table", "--M", "64", "--tol", "1e-30", "--no-timing"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn theory_reports_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t.json");
    for preset in ["example-6.1", "example-6.2", "laplacian"] {
        let o = fkmg(&["theory", "--preset", preset, "--M", "32", "--json", path_arg(&json)]);
        assert_eq!(o.status.code(), Some(0), "{preset}: {}", String::from_utf8_lossy(&o.stderr));
        let bundle: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
        let reports = bundle["reports"].as_array().unwrap();
        assert!(!reports.is_empty());
        assert!(reports.iter().all(|r| r["satisfied"] == true));
    }
}
