use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alchemy"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn summary(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("exp.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn example_reports_exact_mu_and_endpoint() {
    let out = tempfile::tempdir().unwrap();
    let config = bundled("example_bernoulli.cfg");
    let o = run("transform", &config, out.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.path().join("example_bernoulli_transform.csv")).unwrap();
    assert!(csv.contains("10,,mu_n[A0],0.111,"), "{csv}");
    assert!(csv.contains("10,10,endpoint[A0],0.15,"), "{csv}");

    let s = summary(out.path().join("example_bernoulli_transform.json"));
    let hash = hex::encode(Sha256::digest(std::fs::read(&config).unwrap()));
    assert_eq!(s["config_sha256"], Value::String(hash));
    assert_eq!(s["arith"], "exact");
    assert_eq!(s["tolerances"]["probability"], 1e-12);
    assert_eq!(s["job"]["cylinders"][0]["label"], "A0");
    assert_eq!(s["pass"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let config = bundled("golden_transform.cfg");
    for dir in [&a, &b] {
        assert!(run("transform", &config, dir.path(), &[]).status.success());
        assert!(run("audit", &config, dir.path(), &[]).status.success());
    }
    for file in ["golden_transform_transform.csv", "golden_transform_audit.csv", "golden_transform_audit.json"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn golden_mean_pressure_is_log_golden_ratio() {
    let out = tempfile::tempdir().unwrap();
    let o = run("pressure", &bundled("golden_pressure.cfg"), out.path(), &[]);
    assert!(o.status.success());
    let s = summary(out.path().join("golden_pressure.json"));
    let p = s["results"]["pressures"]["zero"]["pressure"].as_f64().unwrap();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((p - golden.ln()).abs() < 1e-10);
}

#[test]
fn float_mode_agrees_with_exact_example() {
    let out = tempfile::tempdir().unwrap();
    let o = run("transform", &bundled("example_bernoulli.cfg"), out.path(), &["--arith", "float"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(out.path().join("example_bernoulli_transform.json"));
    assert_eq!(s["arith"], "float");
    let csv = std::fs::read_to_string(out.path().join("example_bernoulli_transform.csv")).unwrap();
    let value = |quantity: &str| -> f64 {
        let line = csv.lines().find(|l| l.split(',').nth(2) == Some(quantity)).unwrap();
        line.split(',').nth(3).unwrap().parse().unwrap()
    };
    assert!((value("mu_n[A0]") - 0.111).abs() < 1e-12);
    assert!((value("endpoint[A0]") - 0.15).abs() < 1e-12);
}

#[test]
fn forbidden_cylinder_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
[space]
preset = "golden_mean"
[potentials.zero]
kind = "zero"
[job]
g1 = "zero"
g2 = "zero"
past = [0]
n = [10]
cylinders = [{ start = 0, symbols = [1, 1] }]
"#,
    );
    let o = run("transform", &config, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("1 -> 1"), "{err}");
    assert!(!dir.path().join("exp_transform.csv").exists());
}

#[test]
fn non_primitive_space_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
[space]
matrix = [[0, 1], [1, 0]]
[potentials.zero]
kind = "zero"
"#,
    );
    let o = run("pressure", &config, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failed_expectation_exits_5_after_writing() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(bundled("golden_pressure.cfg"))
        .unwrap()
        .replace("zero = 0.4812118250596034", "zero = 0.5");
    let config = write_config(dir.path(), &text);
    let o = run("pressure", &config, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(5));
    let s = summary(dir.path().join("golden_pressure.json"));
    assert_eq!(s["pass"], false);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("audit", &bundled("golden_transform.cfg"), dir.path(), &["--seed", "99"]);
    assert!(o.status.success());
    assert_eq!(summary(dir.path().join("golden_transform_audit.json"))["seed"], 99);
}
