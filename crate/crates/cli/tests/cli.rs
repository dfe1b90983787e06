//! End-to-end tests of the binary: exit codes, report determinism, schema
//! conformance, CSV/plot round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stackel"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stackel-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn verify_classical_exits_zero_and_writes_reports() {
    let dir = tmp_dir("classical");
    let out = run(bin()
        .args([
            "verify",
            "--checks",
            "classical,stackel",
            "-n",
            "2",
            "--a",
            "1,2,4",
        ])
        .args(["--seed", "42", "--out"])
        .arg(&dir));
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.join("report.json").exists());
    assert!(dir.join("report.md").exists());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(parsed["summary"]["ok"], serde_json::Value::Bool(true));
    assert_eq!(parsed["config"]["a"][2], serde_json::json!("4"));
}

#[test]
fn report_is_deterministic_modulo_timing() {
    let d1 = tmp_dir("det1");
    let d2 = tmp_dir("det2");
    for dir in [&d1, &d2] {
        let out = run(bin()
            .args([
                "verify",
                "--checks",
                "classical",
                "-n",
                "2",
                "--a",
                "1,2,4",
                "--seed",
                "7",
            ])
            .arg("--out")
            .arg(dir)
            .env("STACKEL_THREADS", "3"));
        assert!(out.status.success());
    }
    let strip = |p: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        for check in v["checks"].as_array_mut().unwrap() {
            check.as_object_mut().unwrap().remove("millis");
        }
        v
    };
    let a = strip(&d1.join("report.json"));
    let b = strip(&d2.join("report.json"));
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap(),
        "same config + seed must give identical reports"
    );
}

#[test]
fn report_validates_against_shipped_schema() {
    let dir = tmp_dir("schema");
    let out = run(bin()
        .args(["verify", "--checks", "classical", "-n", "2", "--a", "1,2,4"])
        .arg("--out")
        .arg(&dir));
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let mut errors = Vec::new();
    validate(&schema, &report, "$", &mut errors);
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

/// Minimal JSON-schema walker covering the subset the shipped schema uses:
/// type, required, properties, items, enum, minimum/exclusiveMinimum, minItems.
fn validate(
    schema: &serde_json::Value,
    value: &serde_json::Value,
    path: &str,
    errors: &mut Vec<String>,
) {
    use serde_json::Value;
    if let Some(types) = schema.get("type") {
        let allowed: Vec<&str> = match types {
            Value::String(s) => vec![s.as_str()],
            Value::Array(list) => list.iter().filter_map(|v| v.as_str()).collect(),
            _ => vec![],
        };
        let actual = match value {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) => {
                if n.is_u64() || n.is_i64() {
                    "integer"
                } else {
                    "number"
                }
            }
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        let ok = allowed
            .iter()
            .any(|t| *t == actual || (*t == "number" && actual == "integer"));
        if !ok {
            errors.push(format!("{path}: expected type {allowed:?}, got {actual}"));
            return;
        }
    }
    if let Some(options) = schema.get("enum").and_then(|e| e.as_array()) {
        if !options.contains(value) {
            errors.push(format!("{path}: {value} not in {options:?}"));
        }
    }
    if let Some(min) = schema.get("minimum").and_then(|m| m.as_f64()) {
        if let Some(x) = value.as_f64() {
            if x < min {
                errors.push(format!("{path}: {x} below minimum {min}"));
            }
        }
    }
    if let Some(min) = schema.get("exclusiveMinimum").and_then(|m| m.as_f64()) {
        if let Some(x) = value.as_f64() {
            if x <= min {
                errors.push(format!("{path}: {x} not above {min}"));
            }
        }
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        for key in required.iter().filter_map(|k| k.as_str()) {
            if value.get(key).is_none() {
                errors.push(format!("{path}: missing required key '{key}'"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        for (key, sub) in props {
            if let Some(v) = value.get(key) {
                validate(sub, v, &format!("{path}.{key}"), errors);
            }
        }
    }
    if let Some(min_items) = schema.get("minItems").and_then(|m| m.as_u64()) {
        if let Some(arr) = value.as_array() {
            if (arr.len() as u64) < min_items {
                errors.push(format!("{path}: fewer than {min_items} items"));
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v, &format!("{path}[{i}]"), errors);
            }
        }
    }
}

#[test]
fn invalid_config_exits_two() {
    // non-increasing axes
    let out = run(bin().args(["verify", "--checks", "classical", "-n", "2", "--a", "1,1,4"]));
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    // wrong axis count
    let out = run(bin().args(["verify", "--checks", "classical", "-n", "3", "--a", "1,2,4"]));
    assert_eq!(out.status.code(), Some(2));
    // quantum below n = 3
    let out = run(bin().args(["verify", "--checks", "quantum", "-n", "2", "--a", "1,2,4"]));
    assert_eq!(out.status.code(), Some(2));
    // unknown check group
    let out = run(bin().args(["verify", "--checks", "nonsense", "-n", "2", "--a", "1,2,4"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_with_contract_header() {
    let dir = tmp_dir("sim");
    let csv = dir.join("out.csv");
    let out = run(bin()
        .args([
            "simulate",
            "--system",
            "dual-moser",
            "-n",
            "2",
            "--a",
            "1,2,4",
        ])
        .args(["-T", "2", "--samples", "50", "--csv"])
        .arg(&csv));
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,q0,q1,q2,v0,v1,v2,H,F0,F1,F2,J");
    assert_eq!(lines.count(), 50);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("relative drift"));
}

#[test]
fn simulate_rejects_neumann() {
    let out = run(bin().args([
        "simulate",
        "--system",
        "neumann-uhlenbeck",
        "-n",
        "2",
        "--a",
        "1,2,4",
        "--csv",
        "/tmp/x.csv",
    ]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_renders_svgs_and_handles_degenerate_input() {
    let dir = tmp_dir("plot");
    let csv = dir.join("traj.csv");
    let out = run(bin()
        .args([
            "simulate",
            "--system",
            "jacobi-moser",
            "-n",
            "2",
            "--a",
            "1,2,4",
        ])
        .args(["-T", "1", "--samples", "30", "--csv"])
        .arg(&csv));
    assert!(out.status.success());
    let out = run(bin().arg("plot").arg(&csv).arg("--out-dir").arg(&dir));
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let drift = dir.join("traj_drift.svg");
    let trace = dir.join("traj_trace.svg");
    assert!(drift.exists() && trace.exists());
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("<svg"));

    // empty CSV -> exit 2
    let empty = dir.join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = run(bin().arg("plot").arg(&empty).arg("--out-dir").arg(&dir));
    assert_eq!(out.status.code(), Some(2));

    // single-row CSV -> still renders
    let text = std::fs::read_to_string(&csv).unwrap();
    let one: Vec<&str> = text.lines().take(2).collect();
    let single = dir.join("single.csv");
    std::fs::write(&single, one.join("\n")).unwrap();
    let out = run(bin().arg("plot").arg(&single).arg("--out-dir").arg(&dir));
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn quantum_subcommand_reports_expected_conformal_failure() {
    let dir = tmp_dir("quantum");
    let out = run(bin()
        .args([
            "quantum",
            "--system",
            "jacobi-moser",
            "-n",
            "3",
            "--points",
            "2",
            "--testfns",
            "2",
        ])
        .arg("--out")
        .arg(&dir));
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let conformal = checks
        .iter()
        .find(|c| c["name"] == "jacobi-moser/quantum/conformal")
        .expect("conformal record present");
    assert_eq!(conformal["verdict"], "fail");
    assert_eq!(conformal["expected"], "fail");
    assert_eq!(report["summary"]["ok"], serde_json::Value::Bool(true));
}
