use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const RECOVERY: &str = r#"
[scenario]
name = "circle-recovery"
mode = "recovery"
trials = 3
seed = 42

[x]
kind = "circle"
radius = 1.0

[params]
eps_x = 0.4
delta_x = 0.1
"#;

const NOISY: &str = r#"
[scenario]
name = "noisy-identity"
mode = "noisy"
trials = 1
seed = 1

[x]
kind = "circle"
radius = 1.0

[y]
kind = "circle"
radius = 1.0

[map]
kind = "identity"

[params]
eps_x = 0.14
eps_y = 0.9
delta_x = 0.15
delta_y = 0.15
kappa = 1.0
r_x = 0.05
r_y = 0.05
"#;

const STARVED: &str = r#"
[scenario]
name = "starved"
mode = "clean"
trials = 2
seed = 9
override_validation = true

[x]
kind = "circle"
radius = 1.0

[y]
kind = "circle"
radius = 1.0

[map]
kind = "identity"

[params]
eps_x = 0.1
eps_y = 0.45
delta_x = 0.1
delta_y = 0.1
kappa = 1.0
n_y = 4
"#;

fn nerve_recon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nerve-recon")).args(args).output().unwrap()
}

fn config_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_prints_the_sample_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_file(dir.path(), "r.toml", RECOVERY);
    let out = nerve_recon(&["bounds", "--config", s(&cfg)]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let beta = json["beta_x"].as_f64().unwrap();
    assert!((beta - 202.7).abs() < 0.1, "{beta}");
}

#[test]
fn validate_flags_the_lipschitz_gate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_file(dir.path(), "n.toml", NOISY);
    let out = nerve_recon(&["validate", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL Lip'")), "{text}");
}

#[test]
fn experiment_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_file(dir.path(), "r.toml", RECOVERY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = nerve_recon(&["experiment", "--config", s(&cfg), "--seed", "7", "--out", s(out)]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let read = |d: &Path| std::fs::read_to_string(d.join("report.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    let json: serde_json::Value = serde_json::from_str(&read(&a)).unwrap();
    assert_eq!(json["trials"], 3);
}

#[test]
fn max_fail_sets_exit_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_file(dir.path(), "s.toml", STARVED);
    let out = nerve_recon(&["experiment", "--config", s(&cfg), "--max-fail", "0", "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = nerve_recon(&["experiment", "--config", s(&cfg), "--max-fail", "2", "--out", s(&dir.path().join("o"))]);
    assert!(out.status.success());
}

#[test]
fn bad_input_exits_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_file(dir.path(), "bad.toml", "[scenario]\nname = 3\n");
    assert_eq!(nerve_recon(&["bounds", "--config", s(&cfg)]).status.code(), Some(1));
    assert_eq!(nerve_recon(&["bounds", "--config", s(&dir.path().join("missing.toml"))]).status.code(), Some(1));
    assert_eq!(nerve_recon(&["bounds"]).status.code(), Some(1));
    assert_eq!(nerve_recon(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn homology_of_a_points_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_file(dir.path(), "r.toml", RECOVERY);
    let out = nerve_recon(&["sample", "--config", s(&cfg), "--out", s(dir.path())]);
    assert!(out.status.success());
    let pts = dir.path().join("x.pts");
    let out = nerve_recon(&["homology", "--points", s(&pts), "--epsilon", "0.4", "--dmax", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["betti"], serde_json::json!([1, 1]));
}
