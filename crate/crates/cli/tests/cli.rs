//! End-to-end command tests: exit codes, bundle layout, determinism, and
//! the documented failure paths.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polymerlab"))
}

fn write_config(dir: &Path, beta: f64, seed: u64) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    let text = format!(
        r#"beta = {beta}

[domain]
d = 1
n = 32
dx = 0.5
dt = 0.1
t_grid = [0.5, 1.0, 2.0]

[kernel]
shape = "triangular"
radius = 1
amplitude = 1.0

[ensemble]
n_realizations = 6
master_seed = {seed}
boundary_mass_threshold = 1e-2
"#
    );
    fs::write(&path, text).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn verify_default_config_passes() {
    let out = run(bin().arg("verify"));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("check density_normalization: pass"));
    assert!(text.contains("all") && text.contains("checks pass"));
}

#[test]
fn verify_fault_injection_fails_named_check() {
    let out = run(bin().args(["verify", "--inject-fault", "tilt-sign"]));
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("FAILED checks: single_site_increment"),
        "{text}"
    );
}

#[test]
fn invalid_config_exits_two_naming_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        r#"beta = 1.0

[domain]
d = 1
n = 32
dx = 0.5
dt = 0.1
t_grid = [1.0]

[kernel]
shape = "triangular"
radius = 9
amplitude = 1.0

[ensemble]
n_realizations = 2
master_seed = 1
boundary_mass_threshold = 1e-4
"#,
    )
    .unwrap();
    let out = run(bin().args(["--config", path.to_str().unwrap(), "verify"]));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wrap safety"), "{err}");
}

#[test]
fn simulate_writes_wellformed_bundle_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.7, 42);
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        let o = run(bin().args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "simulate",
        ]));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in [
        "records_T0.5.jsonl",
        "records_T1.jsonl",
        "records_T2.jsonl",
        "summaries.csv",
        "manifest.json",
        "config.toml",
    ] {
        assert!(out1.join(name).exists(), "{name} missing");
    }
    // 2 * |t_grid| records, well-formed JSON-Lines
    let text = fs::read_to_string(out1.join("records_T1.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 6);
    for line in &lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.is_object());
    }
    // reruns are byte-identical
    for name in [
        "records_T0.5.jsonl",
        "records_T1.jsonl",
        "records_T2.jsonl",
        "summaries.csv",
        "manifest.json",
    ] {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical reruns");
    }
}

#[test]
fn different_seed_changes_records_not_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.7, 42);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
        "simulate",
    ]));
    run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
        "--seed",
        "4242",
        "simulate",
    ]));
    let a = fs::read_to_string(out1.join("records_T1.jsonl")).unwrap();
    let b = fs::read_to_string(out2.join("records_T1.jsonl")).unwrap();
    assert_ne!(a, b);
    for line in b.lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), 11);
        assert!(obj.contains_key("log_Z_T"));
    }
}

#[test]
fn analyze_full_pipeline_beta_zero_is_green() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.0, 7);
    let out = dir.path().join("out");
    let o = run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "simulate",
    ]));
    assert!(o.status.success());
    let o = run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "analyze",
    ]));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("gamma_positive"));
    assert!(out.join("reports.csv").exists());
    let reports = fs::read_to_string(out.join("reports.csv")).unwrap();
    assert!(reports.starts_with("# master_seed=7"));
}

#[test]
fn truncated_records_exit_three_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.5, 11);
    let out = dir.path().join("out");
    run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "simulate",
    ]));
    // chop the records file mid-line
    let path = out.join("records_T1.jsonl");
    let mut bytes = fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 7);
    fs::write(&path, bytes).unwrap();
    let o = run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "analyze",
    ]));
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("byte offset"), "{err}");
}

#[test]
fn hash_mismatch_requires_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.5, 11);
    let out = dir.path().join("out");
    run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "simulate",
    ]));
    // a different beta changes the config hash
    let cfg2 = write_config(&dir.path().join("."), 0.6, 11);
    let o = run(bin().args([
        "--config",
        cfg2.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "analyze",
    ]));
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = run(bin().args([
        "--config",
        cfg2.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--allow-hash-mismatch",
        "analyze",
    ]));
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("warning"), "{err}");
}

#[test]
fn scan_sweep_writes_combined_csv_and_rejects_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.5, 3);
    let out = dir.path().join("scan");
    let o = run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "scan",
        "--ts",
        "0.5,1.0",
    ]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("T0.5").join("manifest.json").exists());
    assert!(out.join("T1").join("manifest.json").exists());
    let csv = fs::read_to_string(out.join("scan.csv")).unwrap();
    assert!(csv.contains("sweep_param,sweep_value,gamma_hat,var_log_z,var_o_over_t"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("T,")).count(), 2);

    let o = run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "scan",
    ]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn env_var_sets_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.4, 5);
    let out = dir.path().join("envout");
    let o = bin()
        .args(["--config", cfg.to_str().unwrap(), "simulate"])
        .env("POLYMERLAB_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("summaries.csv").exists());
}

#[test]
fn emitted_config_reproduces_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 0.9, 13);
    let out = dir.path().join("out");
    run(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "simulate",
    ]));
    // the bundle's resolved config re-analyzes without a hash mismatch
    let emitted = out.join("config.toml");
    let o = run(bin().args([
        "--config",
        emitted.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "analyze",
    ]));
    assert_ne!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
