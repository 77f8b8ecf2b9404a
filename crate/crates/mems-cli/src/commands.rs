//! The four subcommands: run, sweep, check, validate.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use mems_sim::csvio::{self, fmt_float};
use mems_sim::diagnostics::OutcomeKind;
use mems_sim::dynamics::run_simulation;
use mems_sim::grid::MappedGrid;
use mems_sim::potential::solve_potential;
use mems_sim::state::{DeflectionState, ModelParams};
use mems_sim::theory::{
    check_dissipation, decay_envelope, dirichlet_energy_margin, envelope_violations,
    jensen_bound_margin, singularity_certificate, trace_identity_residual, CertificateReport,
    Eigenpair, ProofParams, ViolationInterval, INEQUALITY_TOL,
};

use crate::config::{
    RunConfig, SweepConfig, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_VIOLATIONS,
};

#[derive(Serialize)]
struct Summary {
    model: String,
    lambda: f64,
    epsilon: f64,
    lambda_star: f64,
    outcome: String,
    #[serde(rename = "T")]
    t_end: f64,
    certificate: CertificateReport,
}

fn io_fail(what: &str, e: impl std::fmt::Display) -> i32 {
    eprintln!("io failure ({what}): {e}");
    EXIT_IO
}

struct RunArtifacts {
    outcome_kind: OutcomeKind,
}

fn execute_run(cfg: &RunConfig, out_dir: &Path) -> Result<RunArtifacts, i32> {
    let grid = MappedGrid::new(cfg.nx, cfg.neta).map_err(|e| {
        eprintln!("{e}");
        EXIT_CONFIG
    })?;
    let u0 = cfg.u0.build(grid.base()).map_err(|e| {
        eprintln!("{e}");
        EXIT_CONFIG
    })?;
    let params = ModelParams::new(cfg.lambda, cfg.epsilon, cfg.q).map_err(|e| {
        eprintln!("{e}");
        EXIT_CONFIG
    })?;
    let (trajectory, outcome) =
        run_simulation(&params, &u0, &cfg.controls, &grid, cfg.snapshot_stride).map_err(|e| {
            eprintln!("{e}");
            EXIT_CONFIG
        })?;

    fs::create_dir_all(out_dir).map_err(|e| io_fail("create output directory", e))?;
    csvio::write_trajectory(&out_dir.join("trajectory.csv"), &trajectory.records)
        .map_err(|e| io_fail("trajectory", e))?;

    let snap_dir = out_dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| io_fail("create snapshot directory", e))?;
    let mut index = String::from("t,file\n");
    for (k, snap) in trajectory.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:06}.csv");
        csvio::write_snapshot(&snap_dir.join(&name), grid.base().nodes(), snap)
            .map_err(|e| io_fail("snapshot", e))?;
        index.push_str(&format!("{},{}\n", fmt_float(snap.t), name));
    }
    fs::write(snap_dir.join("index.csv"), index).map_err(|e| io_fail("snapshot index", e))?;

    let certificate = singularity_certificate(
        &trajectory.records,
        &trajectory.proof,
        &trajectory.envelope,
        cfg.lambda,
        cfg.epsilon,
    );
    let summary = Summary {
        model: if cfg.epsilon == 0.0 {
            "vanishing-aspect".into()
        } else {
            "free-boundary".into()
        },
        lambda: cfg.lambda,
        epsilon: cfg.epsilon,
        lambda_star: trajectory.proof.lambda_star,
        outcome: outcome.kind.to_string(),
        t_end: outcome.t_end,
        certificate,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(out_dir.join("summary.json"), &json).map_err(|e| io_fail("summary", e))?;

    println!(
        "{}: outcome {} at T = {:.6e} ({} records, {} snapshots) -> {}",
        cfg.lambda,
        outcome.kind,
        outcome.t_end,
        trajectory.records.len(),
        trajectory.snapshots.len(),
        out_dir.display()
    );
    if !outcome.detail.is_empty() {
        println!("  {}", outcome.detail);
    }
    Ok(RunArtifacts {
        outcome_kind: outcome.kind,
    })
}

pub fn cmd_run(cfg: &RunConfig) -> i32 {
    match execute_run(cfg, &cfg.out) {
        Ok(art) => match art.outcome_kind {
            OutcomeKind::NumericalFailure => EXIT_NUMERICAL,
            _ => EXIT_OK,
        },
        Err(code) => code,
    }
}

struct SweepRow {
    lambda: f64,
    outcome: String,
    t_touchdown: Option<f64>,
    lambda_star: f64,
    certificate_applicable: bool,
}

impl SweepRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_float(self.lambda),
            self.outcome,
            self.t_touchdown.map(fmt_float).unwrap_or_default(),
            fmt_float(self.lambda_star),
            self.certificate_applicable
        )
    }
}

fn sweep_one(cfg: &RunConfig, lambda: f64) -> SweepRow {
    let failure = || SweepRow {
        lambda,
        outcome: OutcomeKind::NumericalFailure.to_string(),
        t_touchdown: None,
        lambda_star: f64::NAN,
        certificate_applicable: false,
    };
    let run = std::panic::catch_unwind(|| -> Result<SweepRow, String> {
        let grid = MappedGrid::new(cfg.nx, cfg.neta).map_err(|e| e.to_string())?;
        let u0 = cfg.u0.build(grid.base())?;
        let params = ModelParams::new(lambda, cfg.epsilon, cfg.q).map_err(|e| e.to_string())?;
        let (trajectory, outcome) =
            run_simulation(&params, &u0, &cfg.controls, &grid, usize::MAX)
                .map_err(|e| e.to_string())?;
        Ok(SweepRow {
            lambda,
            outcome: outcome.kind.to_string(),
            t_touchdown: (outcome.kind == OutcomeKind::Touchdown).then_some(outcome.t_end),
            lambda_star: trajectory.proof.lambda_star,
            certificate_applicable: lambda > trajectory.proof.lambda_star,
        })
    });
    match run {
        Ok(Ok(row)) => row,
        Ok(Err(msg)) => {
            eprintln!("lambda {lambda}: {msg}");
            failure()
        }
        Err(_) => {
            eprintln!("lambda {lambda}: worker panicked");
            failure()
        }
    }
}

pub fn cmd_sweep(cfg: &SweepConfig) -> i32 {
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<(usize, SweepRow)>> = Mutex::new(Vec::with_capacity(cfg.lambdas.len()));
    let workers = cfg.workers.min(cfg.lambdas.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= cfg.lambdas.len() {
                    break;
                }
                let row = sweep_one(&cfg.base, cfg.lambdas[k]);
                rows.lock().expect("sweep collector").push((k, row));
            });
        }
    });
    let mut rows = rows.into_inner().expect("sweep collector");
    rows.sort_by_key(|(k, _)| *k);
    if rows.len() != cfg.lambdas.len() {
        eprintln!("sweep lost rows: {} of {}", rows.len(), cfg.lambdas.len());
        return EXIT_NUMERICAL;
    }

    let out = &cfg.base.out;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = fs::create_dir_all(parent) {
                return io_fail("create sweep output directory", e);
            }
        }
    }
    let path: PathBuf = if out.extension().is_some() {
        out.clone()
    } else {
        if let Err(e) = fs::create_dir_all(out) {
            return io_fail("create sweep output directory", e);
        }
        out.join("sweep.csv")
    };
    let mut file = match fs::File::create(&path) {
        Ok(f) => f,
        Err(e) => return io_fail("sweep csv", e),
    };
    let mut text = String::from("lambda,outcome,T_touchdown,lambda_star,certificate_applicable\n");
    for (_, row) in &rows {
        text.push_str(&row.to_csv());
        text.push('\n');
    }
    if let Err(e) = file.write_all(text.as_bytes()) {
        return io_fail("sweep csv", e);
    }
    println!("wrote {} rows -> {}", rows.len(), path.display());
    EXIT_OK
}

#[derive(Serialize)]
struct CheckReport {
    lambda_star: f64,
    p: f64,
    delta: f64,
    alpha: f64,
    chi: f64,
    y_pdelta: Option<f64>,
    t_pdelta: Option<f64>,
    barrier_crossing_time: Option<f64>,
    violations: Vec<ViolationInterval>,
    snapshots_checked: usize,
    snapshots_skipped: usize,
}

pub struct CheckArgs {
    pub dir: PathBuf,
    pub neta: usize,
    pub q: f64,
}

fn config_fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("{msg}");
    EXIT_CONFIG
}

pub fn cmd_check(args: &CheckArgs) -> i32 {
    let summary_text = match fs::read_to_string(args.dir.join("summary.json")) {
        Ok(t) => t,
        Err(e) => return config_fail(format!("cannot read summary.json: {e}")),
    };
    let summary: serde_json::Value = match serde_json::from_str(&summary_text) {
        Ok(v) => v,
        Err(e) => return config_fail(format!("summary.json: {e}")),
    };
    let Some(lambda) = summary["lambda"].as_f64() else {
        return config_fail("summary.json: missing lambda");
    };
    let Some(epsilon) = summary["epsilon"].as_f64() else {
        return config_fail("summary.json: missing epsilon");
    };

    let records = match csvio::read_trajectory(&args.dir.join("trajectory.csv")) {
        Ok(r) => r,
        Err(e) => return config_fail(e),
    };
    if records.is_empty() {
        return config_fail("trajectory.csv has no records");
    }

    let snap_dir = args.dir.join("snapshots");
    let index = match fs::read_to_string(snap_dir.join("index.csv")) {
        Ok(t) => t,
        Err(e) => return config_fail(format!("missing snapshots: {e}")),
    };
    let mut snapshots: Vec<DeflectionState> = Vec::new();
    for line in index.lines().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((t_str, file)) = line.split_once(',') else {
            return config_fail(format!("snapshot index: bad line {line:?}"));
        };
        let t: f64 = match t_str.parse() {
            Ok(v) => v,
            Err(_) => return config_fail(format!("snapshot index: bad time {t_str:?}")),
        };
        let (_, us) = match csvio::read_snapshot(&snap_dir.join(file.trim())) {
            Ok(v) => v,
            Err(e) => return config_fail(e),
        };
        snapshots.push(DeflectionState { t, u: us });
    }
    if snapshots.is_empty() {
        return config_fail("missing snapshots: index is empty");
    }
    if snapshots[0].t.abs() > 1e-12 {
        return config_fail("snapshots do not start at t = 0");
    }

    let nx = snapshots[0].u.len();
    let grid = match MappedGrid::new(nx, args.neta) {
        Ok(g) => g,
        Err(e) => return config_fail(e),
    };
    let u0 = match DeflectionState::new(0.0, snapshots[0].u.clone(), grid.base()) {
        Ok(s) => s,
        Err(e) => return config_fail(format!("initial snapshot: {e}")),
    };
    let proof = match ProofParams::derive(u0.max_u_pos(), epsilon, lambda) {
        Ok(p) => p,
        Err(e) => return config_fail(e),
    };
    let envelope = decay_envelope(&u0);
    let params = match ModelParams::new(lambda, epsilon, args.q) {
        Ok(p) => p,
        Err(e) => return config_fail(e),
    };
    let eig = Eigenpair::on_grid(grid.base());

    let mut violations = envelope_violations(&records, &envelope);
    violations.extend(check_dissipation(
        &records,
        proof.p,
        proof.delta,
        lambda,
        epsilon,
        grid.base().spacing(),
    ));

    let mut checked = 0usize;
    let mut skipped = 0usize;
    for snap in &snapshots {
        let pot = match solve_potential(snap, &params, &grid, None) {
            Ok(p) => p,
            Err(_) => {
                // states at or below the clearance are classified, not solved
                skipped += 1;
                continue;
            }
        };
        checked += 1;
        let residual = trace_identity_residual(snap, &pot, &grid, &eig, proof.p, epsilon);
        let lhs_scale =
            mems_sim::theory::weighted_trace_integral(snap, &pot, &grid, &eig, epsilon).abs();
        if residual > INEQUALITY_TOL * (1.0 + lhs_scale) {
            violations.push(ViolationInterval {
                kind: "trace-identity".into(),
                t_start: snap.t,
                t_end: snap.t,
                excess: residual,
            });
        }
        let (margin, scale) = dirichlet_energy_margin(snap, &pot, &grid, &eig, proof.p);
        if margin < -INEQUALITY_TOL * scale.max(1.0) {
            violations.push(ViolationInterval {
                kind: "dirichlet-lower-bound".into(),
                t_start: snap.t,
                t_end: snap.t,
                excess: -margin,
            });
        }
        let (margin, scale) =
            jensen_bound_margin(snap, &pot, &grid, &eig, proof.p, epsilon, proof.alpha);
        if margin < -INEQUALITY_TOL * scale.max(1.0) {
            violations.push(ViolationInterval {
                kind: "jensen-lower-bound".into(),
                t_start: snap.t,
                t_end: snap.t,
                excess: -margin,
            });
        }
    }

    let certificate = singularity_certificate(&records, &proof, &envelope, lambda, epsilon);
    violations.extend(certificate.violations.clone());

    let report = CheckReport {
        lambda_star: proof.lambda_star,
        p: proof.p,
        delta: proof.delta,
        alpha: proof.alpha,
        chi: proof.chi,
        y_pdelta: certificate.y_pdelta,
        t_pdelta: certificate.t_pdelta,
        barrier_crossing_time: certificate.barrier_crossing_time,
        violations,
        snapshots_checked: checked,
        snapshots_skipped: skipped,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    if let Err(e) = fs::write(args.dir.join("check_report.json"), &json) {
        return io_fail("check report", e);
    }
    if report.violations.is_empty() {
        EXIT_OK
    } else {
        eprintln!("{} violation(s) found", report.violations.len());
        EXIT_VIOLATIONS
    }
}

pub fn cmd_validate() -> i32 {
    let started = std::time::Instant::now();
    let battery = mems_sim::verification::run_battery();
    let mut all_ok = true;
    println!("{:<30} {:<6} detail", "check", "result");
    for item in &battery {
        all_ok &= item.passed;
        println!(
            "{:<30} {:<6} {}",
            item.name,
            if item.passed { "PASS" } else { "FAIL" },
            item.detail
        );
    }
    println!(
        "{} of {} checks passed in {:.1?}",
        battery.iter().filter(|i| i.passed).count(),
        battery.len(),
        started.elapsed()
    );
    if all_ok {
        EXIT_OK
    } else {
        1
    }
}
