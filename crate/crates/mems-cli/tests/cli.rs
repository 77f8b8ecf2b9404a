//! End-to-end tests of the binary: exit codes, file schemas, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mems-sim"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .env_remove("MEMS_SIM_THREADS")
        .output()
        .expect("binary runs")
}

/// Small fast grid for CLI-level tests.
const FAST: &[&str] = &["--nx", "65", "--neta", "33"];

#[test]
fn run_supercritical_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "run", "--lambda", "14", "--epsilon", "0.1", "--u0", "zero", "--out", "bench",
    ];
    args.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args);
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );

    let base = dir.path().join("bench");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["model"], "free-boundary");
    assert_eq!(summary["outcome"], "Touchdown");
    assert_eq!(summary["lambda"], 14.0);
    let lambda_star = summary["lambda_star"].as_f64().unwrap();
    assert!((lambda_star - 13.428).abs() <= 1e-3, "{lambda_star}");
    assert!(summary["T"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["certificate"]["applicable"], true);

    let trajectory = std::fs::read_to_string(base.join("trajectory.csv")).unwrap();
    assert!(trajectory
        .starts_with("t,dt,min_u,max_u,E_alpha,dE_dt,F_of_E,envelope,sobolev_proxy\n"));
    assert!(base.join("snapshots/index.csv").exists());
    assert!(base.join("snapshots/snapshot_000000.csv").exists());
}

#[test]
fn run_reduced_model_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "run", "--lambda", "14", "--epsilon", "0", "--out", "reduced",
    ];
    args.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("reduced/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["model"], "vanishing-aspect");
    // the audit runs through the closed-form potential path
    let out = run_in(dir.path(), &["check", "reduced", "--neta", "33"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn negative_lambda_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "--lambda", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_lambda_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambda"), "{err}");
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "lambda = 14\nvoltag = 3\n").unwrap();
    let out = run_in(dir.path(), &["run", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("voltag"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "lambda = 900\nnx = 65\nneta = 33\nu0 = arch:0.1\nt_max = 0.02\nout = cfgout\n",
    )
    .unwrap();
    // the flag lambda replaces the absurd file value
    let out = run_in(
        dir.path(),
        &["run", "--config", "run.cfg", "--lambda", "0.5"],
    );
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cfgout/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["lambda"], 0.5);
    assert_eq!(summary["outcome"], "Survived");
}

#[test]
fn sweep_rows_sorted_and_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut args_one = vec![
        "sweep",
        "--lambdas",
        "16,12,14",
        "--epsilon",
        "0.1",
        "--t-max",
        "1.0",
        "--workers",
        "1",
        "--out",
        "one.csv",
    ];
    args_one.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args_one);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut args_four = vec![
        "sweep",
        "--lambdas",
        "16,12,14",
        "--epsilon",
        "0.1",
        "--t-max",
        "1.0",
        "--workers",
        "4",
        "--out",
        "four.csv",
    ];
    args_four.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args_four);
    assert!(out.status.success());

    let one = std::fs::read(dir.path().join("one.csv")).unwrap();
    let four = std::fs::read(dir.path().join("four.csv")).unwrap();
    assert_eq!(one, four, "worker count changed the sweep output");

    let text = String::from_utf8(one).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,outcome,T_touchdown,lambda_star,certificate_applicable"
    );
    let lambdas: Vec<f64> = lines
        .clone()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(lambdas, vec![12.0, 14.0, 16.0]);
    // all supercritical: touchdown with T decreasing in lambda
    let times: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(times.windows(2).all(|w| w[1] <= w[0]), "{times:?}");
}

#[test]
fn sweep_env_var_overrides_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep", "--lambdas", "14", "--t-max", "0.5", "--workers", "0", "--out", "env.csv",
    ];
    args.extend_from_slice(FAST);
    // workers = 0 would be rejected, but the env var wins
    let out = bin()
        .current_dir(dir.path())
        .args(&args)
        .env("MEMS_SIM_THREADS", "2")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn empty_sweep_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["sweep", "--lambdas", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes_on_fresh_run_and_flags_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "run", "--lambda", "14", "--epsilon", "0.1", "--out", "checked", "--snapshot-stride",
        "20",
    ];
    args.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success());

    let out = run_in(dir.path(), &["check", "checked", "--neta", "33"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("checked/check_report.json")).unwrap(),
    )
    .unwrap();
    assert!(report["violations"].as_array().unwrap().is_empty());
    assert!(report["y_pdelta"].as_f64().unwrap() > 0.0);

    // corrupt the energy column of one mid-trajectory row
    let traj_path = dir.path().join("checked/trajectory.csv");
    let text = std::fs::read_to_string(&traj_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mid = lines.len() / 2;
    let mut fields: Vec<String> = lines[mid].split(',').map(String::from).collect();
    fields[4] = "5.0".into();
    lines[mid] = fields.join(",");
    std::fs::write(&traj_path, lines.join("\n") + "\n").unwrap();

    let out = run_in(dir.path(), &["check", "checked", "--neta", "33"]);
    assert_eq!(out.status.code(), Some(5));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("checked/check_report.json")).unwrap(),
    )
    .unwrap();
    assert!(!report["violations"].as_array().unwrap().is_empty());
}

#[test]
fn check_without_snapshots_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--lambda", "14", "--out", "nosnap"];
    args.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success());
    std::fs::remove_dir_all(dir.path().join("nosnap/snapshots")).unwrap();
    let out = run_in(dir.path(), &["check", "nosnap"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn arch_profile_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "run", "--lambda", "14", "--u0", "arch:0.1", "--out", "arch",
    ];
    args.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success());
    // first snapshot is the arch: max u = 0.2 at x = 0
    let snap =
        std::fs::read_to_string(dir.path().join("arch/snapshots/snapshot_000000.csv")).unwrap();
    let max_u: f64 = snap
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
        ;
    assert!((max_u - 0.2).abs() < 1e-12, "max u = {max_u}");
}

#[test]
fn unresolvable_run_exits_three() {
    // a frozen large step cannot track the quenching timescale; the run is
    // classified as a numerical failure, recorded, and exits 3
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "run", "--lambda", "50", "--epsilon", "0", "--dt-init", "0.01", "--dt-min", "0.01",
        "--dt-max", "0.01", "--out", "frozen",
    ];
    args.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(3));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("frozen/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["outcome"], "NumericalFailure");
}

#[test]
fn tabulated_profile_from_file() {
    let dir = tempfile::tempdir().unwrap();
    // coarse triangle-ish dip, interpolated onto the run grid
    std::fs::write(
        dir.path().join("shape.csv"),
        "x,u\n-1,0\n-0.5,-0.1\n0,-0.2\n0.5,-0.1\n1,0\n",
    )
    .unwrap();
    let mut args = vec![
        "run", "--lambda", "0.5", "--u0", "file:shape.csv", "--t-max", "0.05", "--out", "tab",
    ];
    args.extend_from_slice(FAST);
    let out = run_in(dir.path(), &args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let snap =
        std::fs::read_to_string(dir.path().join("tab/snapshots/snapshot_000000.csv")).unwrap();
    let min_u: f64 = snap
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!((min_u + 0.2).abs() < 1e-12, "min u = {min_u}");
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}
