use std::path::Path;
use std::process::{Command, Output};

fn lbsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn lists_every_preset() {
    let out = lbsim(&["list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 14);
    assert!(text.contains("fig12_subflow_failures"));
}

#[test]
fn describe_flags_marginal_capacity() {
    let out = lbsim(&["describe", "fig4_failures"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("21 points"));
    let flagged: Vec<_> = text.lines().filter(|l| l.contains("insufficient")).collect();
    assert_eq!(flagged.len(), 7);
    assert!(flagged.iter().all(|l| l.contains("f=4,p=0.6")));
}

#[test]
fn unknown_target_fails() {
    let out = lbsim(&["run", "no_such_preset"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("neither a preset"));
}

#[test]
fn bad_config_reports_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"topology": {"kk": 4}}"#);
    let out = lbsim(&["run", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("kk"));
}

#[test]
fn runs_a_config_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tiny.json",
        r#"{"topology": {"k": 4}, "workload": {"message_packets": 20}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = lbsim(&["run", &cfg, "--seeds", "1,2", "-j", "1", "-o", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = std::fs::read_to_string(out_dir.join("tiny.csv")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    assert!(out_dir.join("tiny_aggregate.csv").exists());
}

#[test]
fn incomplete_runs_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cut.json",
        r#"{"topology": {"k": 4}, "workload": {"message_packets": 200}, "caps": {"time_limit_ms": 0.02}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = lbsim(&["run", &cfg, "--seed-count", "1", "-o", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let runs = std::fs::read_to_string(out_dir.join("cut.csv")).unwrap();
    assert!(runs.contains("time_limit"));
}

#[test]
fn sweep_crosses_axes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "base.json",
        r#"{"topology": {"k": 4}, "workload": {"message_packets": 10}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = lbsim(&[
        "sweep",
        &cfg,
        "--axis",
        "rate_coefficient=0.5,1.0",
        "--axis",
        "lb.scheme=ecmp,host_spray",
        "--seeds",
        "1",
        "-o",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agg = std::fs::read_to_string(out_dir.join("base_sweep_aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 5);
}

#[test]
fn non_scalar_axis_rejected() {
    let out = lbsim(&["sweep", "smoke_k4", "--axis", "topology=1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a scalar"));
}
