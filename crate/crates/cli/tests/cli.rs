//! End-to-end tests of the command-line interface: output values, exit
//! codes, report files and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_homoclinic")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_zero_potential(dir: &Path) -> PathBuf {
    let path = dir.join("zero.json");
    std::fs::write(
        &path,
        r#"{"alphabet": 2, "range": 1, "values": {"1": 0.0, "2": 0.0}}"#,
    )
    .unwrap();
    path
}

fn write_random_potential(dir: &Path) -> PathBuf {
    let path = dir.join("rand22.json");
    std::fs::write(
        &path,
        r#"{"alphabet": 2, "range": 2, "values": {"11": 0.31, "12": -0.12, "21": 0.47, "22": -0.58}}"#,
    )
    .unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn pressure_of_zero_potential_is_log_two() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_zero_potential(dir.path());
    let out = run(&["pressure", "--potential", potential.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("lambda = 2.0000000000000000e0"), "{text}");
    assert!(text.contains("pressure = 6.9314718055994529e-1"), "{text}");
}

#[test]
fn measure_of_symmetric_cylinder_at_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_zero_potential(dir.path());
    let out = run(&[
        "measure",
        "--cylinder",
        "11|21",
        "--potential",
        potential.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "6.2500000000000000e-2");
}

#[test]
fn cocycle_requires_contexts_for_range_two() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_random_potential(dir.path());
    let out = run(&[
        "cocycle",
        "--pair",
        "11|21,12|12",
        "--potential",
        potential.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "missing contexts are an input error"
    );

    let out = run(&[
        "cocycle",
        "--pair",
        "11|21,12|12",
        "--potential",
        potential.to_str().unwrap(),
        "--left-ctx",
        "1",
        "--right-ctx",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "8.8999999999999990e-1");
}

#[test]
fn malformed_potential_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"alphabet": 2, "range": 1, "values": {"1": 0.0}}"#,
    )
    .unwrap();
    let out = run(&["pressure", "--potential", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn span_cap_exceeded_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_zero_potential(dir.path());
    let out = run(&[
        "finite-volume",
        "--cylinder",
        "1|1",
        "--potential",
        potential.to_str().unwrap(),
        "--a=-30",
        "--b",
        "30",
        "--span-cap",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn hull_cap_exceeded_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(
        &a,
        r#"[{"window": [-8, -8], "source": "1", "target": "2", "re": 1.0, "im": 0.0}]"#,
    )
    .unwrap();
    std::fs::write(
        &b,
        r#"[{"window": [8, 8], "source": "1", "target": "2", "re": 1.0, "im": 0.0}]"#,
    )
    .unwrap();
    let out = run(&[
        "algebra",
        "convolve",
        "--a",
        a.to_str().unwrap(),
        "--b",
        b.to_str().unwrap(),
        "--alphabet",
        "2",
        "--hull-cap",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_gibbs_writes_schema_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_random_potential(dir.path());
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "gibbs",
        "--potential",
        potential.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("gibbs: PASS"));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    homoclinic::report::validate(&homoclinic::report::report_schema(), &value).unwrap();
    // No stray temporary file once the write has landed.
    assert!(!dir.path().join("report.json.tmp").exists());
}

#[test]
fn verify_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_random_potential(dir.path());
    let r1 = dir.path().join("kms1.json");
    let r2 = dir.path().join("kms2.json");
    for path in [&r1, &r2] {
        let out = run(&[
            "verify",
            "kms",
            "--potential",
            potential.to_str().unwrap(),
            "--seed",
            "42",
            "--samples",
            "5",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(&r1).unwrap();
    let b = std::fs::read(&r2).unwrap();
    assert_eq!(a, b, "reports differ across identical runs");
}

#[test]
fn verify_uniqueness_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_random_potential(dir.path());
    let out = run(&[
        "verify",
        "uniqueness",
        "--potential",
        potential.to_str().unwrap(),
        "--depth",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("uniqueness: PASS"));
}

#[test]
fn csv_report_flattens_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_random_potential(dir.path());
    let report = dir.path().join("report.csv");
    let out = run(&[
        "verify",
        "bowen",
        "--potential",
        potential.to_str().unwrap(),
        "--format",
        "csv",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("section,key,value\n"), "{text}");
    assert!(text.contains("bowen,ratio_min,"), "{text}");
}

#[test]
fn schema_command_emits_check_families() {
    let out = run(&["report-schema"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let checks = &value["properties"]["checks"]["properties"];
    for key in ["gibbs", "bowen", "kms"] {
        assert!(checks.get(key).is_some(), "schema lacks {key}");
    }
    // Stable across invocations.
    let again = run(&["report-schema"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn algebra_eval_identity_membership() {
    let dir = tempfile::tempdir().unwrap();
    let element = dir.path().join("id.json");
    std::fs::write(
        &element,
        r#"[{"window": [], "source": "", "target": "", "re": 1.0, "im": 0.0}]"#,
    )
    .unwrap();
    let out = run(&[
        "algebra",
        "eval",
        "--element",
        element.to_str().unwrap(),
        "--alphabet",
        "2",
        "--window",
        "-1,1",
        "--x",
        "12",
        "--y",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("re = 1.0000000000000000e0"));

    let out = run(&[
        "algebra",
        "eval",
        "--element",
        element.to_str().unwrap(),
        "--alphabet",
        "2",
        "--window",
        "-1,1",
        "--x",
        "12",
        "--y",
        "21",
    ]);
    assert!(stdout(&out).contains("re = 0.0000000000000000e0"));
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_random_potential(dir.path());
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "gibbs",
        "--potential",
        potential.to_str().unwrap(),
        "--tol",
        "1e-20",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("gibbs: FAIL"));
    // The report is still written, atomically, and records the failure.
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(value["checks"]["gibbs"]["pass"], serde_json::json!(false));
}

#[test]
fn normalized_potential_round_trips_with_zero_pressure() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write_random_potential(dir.path());
    let normalized = dir.path().join("normalized.json");
    let out = run(&[
        "normalize",
        "--potential",
        potential.to_str().unwrap(),
        "--output",
        normalized.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["pressure", "--potential", normalized.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let p: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("pressure = "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(p.abs() <= 1e-12, "normalized potential has pressure {p}");
}
