use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use burgers2d::cli::{cmd_verify, VerifyOptions};
use burgers2d::config::RunConfig;

const BIN: &str = env!("CARGO_BIN_EXE_burgers2d");

fn smoke_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.toml")
}

fn burgers2d(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn smoke_run_is_fast_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let start = Instant::now();
    let o = burgers2d(&["simulate", "--config", smoke_config().to_str().unwrap(), "--out", out, "--workers", "1"]);
    let secs = start.elapsed().as_secs_f64();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(secs < 10.0, "{secs} s");
    let norms = std::fs::read_to_string(dir.path().join("simulate_norms.csv")).unwrap();
    assert!(norms.starts_with("# burgers2d "));
    assert!(norms.lines().next().unwrap().contains("config="));
    assert!(dir.path().join("field_t4.bin").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (d, w) in [(&a, "1"), (&b, "2")] {
        let o = burgers2d(&["simulate", "--config", smoke_config().to_str().unwrap(), "--out", d.path().to_str().unwrap(), "--workers", w]);
        assert!(o.status.success());
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn missing_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(smoke_config()).unwrap().replace("wave.u_plus = 1.0", "");
    let p = write_config(dir.path(), &text);
    let o = burgers2d(&["simulate", "--config", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("wave.u_plus"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(smoke_config()).unwrap() + "solver.cfll = 0.5\n";
    let p = write_config(dir.path(), &text);
    let o = burgers2d(&["construct", "--config", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver.cfll"));
}

#[test]
fn steep_line_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        "curve.kind = \"line\"\ncurve.k = 1.0\nwave.u_minus = -1.0\nwave.u_plus = 1.0\n",
    );
    let o = burgers2d(&["construct", "--config", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("hyperbolic"));
}

#[test]
fn missing_config_flag_is_a_config_error() {
    assert_eq!(burgers2d(&["verify"]).status.code(), Some(2));
    assert_eq!(burgers2d(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(burgers2d(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_passes_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&smoke_config()).unwrap();
    cfg.out = dir.path().to_path_buf();
    let ok = cmd_verify(&cfg, &VerifyOptions::default()).unwrap();
    assert!(ok.passed, "{}", ok.summary);
    let bad = cmd_verify(&cfg, &VerifyOptions { tamper_a: Some(-3.0) }).unwrap();
    assert!(!bad.passed);
    let failing: Vec<&str> = bad.summary.lines().filter(|l| l.contains("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{}", bad.summary);
    assert!(failing[0].contains("line coefficients"));
}

#[test]
fn verify_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = burgers2d(&["verify", "--config", smoke_config().to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("verify.txt").exists());
}
