mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Raw, EXIT_CONFIG};

/// Free-boundary MEMS simulator: coupled plate/potential dynamics with
/// touchdown diagnostics and theorem-side checks.
#[derive(Parser)]
#[command(name = "mems-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes trajectory.csv, snapshots/ and summary.json
    Run(RunFlags),
    /// Run one simulation per lambda on parallel workers; writes a sweep CSV
    Sweep(SweepFlags),
    /// Re-evaluate envelope, dissipation and gap-integral checks on a stored run
    Check(CheckFlags),
    /// Built-in solver validation battery
    Validate,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Flat key = value config file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Applied-voltage parameter (> 0)
    #[arg(long)]
    lambda: Option<f64>,
    /// Aspect ratio (0 selects the reduced vanishing-aspect model)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Exponent of the blow-up proxy norm (> 2)
    #[arg(long)]
    q: Option<f64>,
    /// Initial profile: zero | arch:h | bell:a,w | eig:c | file:path
    #[arg(long)]
    u0: Option<String>,
    /// Plate nodes (odd, >= 33)
    #[arg(long)]
    nx: Option<usize>,
    /// Vertical nodes of the mapped gap (>= 17)
    #[arg(long)]
    neta: Option<usize>,
    #[arg(long)]
    dt_init: Option<f64>,
    #[arg(long)]
    dt_min: Option<f64>,
    #[arg(long)]
    dt_max: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Touchdown clearance on min(1+u)
    #[arg(long)]
    touch_eps: Option<f64>,
    /// Max relative change of min(1+u) per step
    #[arg(long)]
    cfl_source: Option<f64>,
    /// Output directory (run) or CSV path/directory (sweep)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Store a state snapshot every this many accepted steps
    #[arg(long)]
    snapshot_stride: Option<usize>,
}

#[derive(Args)]
struct RunFlags {
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args)]
struct SweepFlags {
    #[command(flatten)]
    common: CommonFlags,
    /// Comma-separated lambda list, e.g. 10,12,14
    #[arg(long)]
    lambdas: Option<String>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_count: Option<usize>,
    /// linear | geometric
    #[arg(long)]
    lambda_spacing: Option<String>,
    /// Worker threads (MEMS_SIM_THREADS overrides)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CheckFlags {
    /// Output directory of a previous `run`
    dir: PathBuf,
    /// Vertical nodes for re-solving the gap potential on snapshots
    #[arg(long, default_value_t = 101)]
    neta: usize,
    /// Blow-up proxy exponent
    #[arg(long, default_value_t = 4.0)]
    q: f64,
}

fn flags_to_raw(f: &CommonFlags) -> Raw {
    Raw {
        lambda: f.lambda,
        epsilon: f.epsilon,
        q: f.q,
        u0: f.u0.clone(),
        nx: f.nx,
        neta: f.neta,
        dt_init: f.dt_init,
        dt_min: f.dt_min,
        dt_max: f.dt_max,
        t_max: f.t_max,
        touch_eps: f.touch_eps,
        cfl_source: f.cfl_source,
        out: f.out.clone(),
        snapshot_stride: f.snapshot_stride,
        ..Raw::default()
    }
}

fn merged_raw(common: &CommonFlags) -> Result<Raw, String> {
    let base = match &common.config {
        Some(path) => Raw::from_file(path)?,
        None => Raw::default(),
    };
    Ok(base.overlay(flags_to_raw(common)))
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run(flags) => {
            let raw = match merged_raw(&flags.common) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return EXIT_CONFIG;
                }
            };
            match config::resolve_run(&raw) {
                Ok(cfg) => commands::cmd_run(&cfg),
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::Sweep(flags) => {
            let raw = match merged_raw(&flags.common) {
                Ok(mut r) => {
                    if flags.lambdas.is_some() {
                        r.lambdas = flags.lambdas.clone();
                    }
                    if flags.lambda_min.is_some() {
                        r.lambda_min = flags.lambda_min;
                    }
                    if flags.lambda_max.is_some() {
                        r.lambda_max = flags.lambda_max;
                    }
                    if flags.lambda_count.is_some() {
                        r.lambda_count = flags.lambda_count;
                    }
                    if flags.lambda_spacing.is_some() {
                        r.lambda_spacing = flags.lambda_spacing.clone();
                    }
                    if flags.workers.is_some() {
                        r.workers = flags.workers;
                    }
                    r
                }
                Err(e) => {
                    eprintln!("{e}");
                    return EXIT_CONFIG;
                }
            };
            match config::resolve_sweep(&raw) {
                Ok(cfg) => commands::cmd_sweep(&cfg),
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::Check(flags) => commands::cmd_check(&commands::CheckArgs {
            dir: flags.dir,
            neta: flags.neta,
            q: flags.q,
        }),
        Command::Validate => commands::cmd_validate(),
    }
}

fn main() {
    std::process::exit(real_main());
}
