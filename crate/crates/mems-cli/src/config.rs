//! Run and sweep configuration: a flat `key = value` file plus equivalent
//! flags, with flags taking precedence. Unknown keys and malformed values
//! are rejected with the offending key named.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use mems_sim::dynamics::StepControls;
use mems_sim::grid::Grid1D;
use mems_sim::profiles;
use mems_sim::state::DeflectionState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_VIOLATIONS: i32 = 5;

/// Initial-data selector: zero | arch:h | bell:a,w | eig:c | file:path.
#[derive(Debug, Clone, PartialEq)]
pub enum U0Spec {
    Zero,
    Arch(f64),
    Bell(f64, f64),
    Eig(f64),
    File(PathBuf),
}

impl U0Spec {
    pub fn parse(s: &str) -> Result<Self, String> {
        if s == "zero" {
            return Ok(U0Spec::Zero);
        }
        if let Some(rest) = s.strip_prefix("arch:") {
            let h: f64 = rest
                .parse()
                .map_err(|_| format!("u0: bad arch height {rest:?}"))?;
            return Ok(U0Spec::Arch(h));
        }
        if let Some(rest) = s.strip_prefix("bell:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(format!("u0: bell needs amplitude,width, got {rest:?}"));
            }
            let a: f64 = parts[0]
                .parse()
                .map_err(|_| format!("u0: bad bell amplitude {:?}", parts[0]))?;
            let w: f64 = parts[1]
                .parse()
                .map_err(|_| format!("u0: bad bell width {:?}", parts[1]))?;
            return Ok(U0Spec::Bell(a, w));
        }
        if let Some(rest) = s.strip_prefix("eig:") {
            let c: f64 = rest
                .parse()
                .map_err(|_| format!("u0: bad eigenfunction scale {rest:?}"))?;
            return Ok(U0Spec::Eig(c));
        }
        if let Some(rest) = s.strip_prefix("file:") {
            return Ok(U0Spec::File(PathBuf::from(rest)));
        }
        Err(format!(
            "u0: expected zero | arch:h | bell:a,w | eig:c | file:path, got {s:?}"
        ))
    }

    pub fn build(&self, grid: &Grid1D) -> Result<DeflectionState, String> {
        let state = match self {
            U0Spec::Zero => Ok(profiles::zero(grid)),
            U0Spec::Arch(h) => profiles::arch(grid, *h),
            U0Spec::Bell(a, w) => profiles::bell(grid, *a, *w),
            U0Spec::Eig(c) => profiles::eigenfunction(grid, *c),
            U0Spec::File(path) => {
                let (xs, us) =
                    mems_sim::csvio::read_snapshot(path).map_err(|e| format!("u0: {e}"))?;
                profiles::tabulated(grid, &xs, &us)
            }
        };
        state.map_err(|e| format!("u0: {e}"))
    }
}

/// Every recognised key, optional until resolution.
#[derive(Debug, Clone, Default)]
pub struct Raw {
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub q: Option<f64>,
    pub u0: Option<String>,
    pub nx: Option<usize>,
    pub neta: Option<usize>,
    pub dt_init: Option<f64>,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    pub t_max: Option<f64>,
    pub touch_eps: Option<f64>,
    pub cfl_source: Option<f64>,
    pub out: Option<PathBuf>,
    pub snapshot_stride: Option<usize>,
    pub workers: Option<usize>,
    pub lambdas: Option<String>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_count: Option<usize>,
    pub lambda_spacing: Option<String>,
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("config key {key}: malformed value {value:?}"))
}

impl Raw {
    pub fn from_file(path: &Path) -> Result<Raw, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut map = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("config line {}: expected key = value", no + 1));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(format!("config key {key}: given twice"));
            }
        }
        let mut raw = Raw::default();
        for (key, value) in map {
            match key.as_str() {
                "lambda" => raw.lambda = Some(parse_as(&key, &value)?),
                "epsilon" => raw.epsilon = Some(parse_as(&key, &value)?),
                "q" => raw.q = Some(parse_as(&key, &value)?),
                "u0" => raw.u0 = Some(value),
                "nx" => raw.nx = Some(parse_as(&key, &value)?),
                "neta" => raw.neta = Some(parse_as(&key, &value)?),
                "dt_init" => raw.dt_init = Some(parse_as(&key, &value)?),
                "dt_min" => raw.dt_min = Some(parse_as(&key, &value)?),
                "dt_max" => raw.dt_max = Some(parse_as(&key, &value)?),
                "t_max" => raw.t_max = Some(parse_as(&key, &value)?),
                "touch_eps" => raw.touch_eps = Some(parse_as(&key, &value)?),
                "cfl_source" => raw.cfl_source = Some(parse_as(&key, &value)?),
                "out" => raw.out = Some(PathBuf::from(value)),
                "snapshot_stride" => raw.snapshot_stride = Some(parse_as(&key, &value)?),
                "workers" => raw.workers = Some(parse_as(&key, &value)?),
                "lambdas" => raw.lambdas = Some(value),
                "lambda_min" => raw.lambda_min = Some(parse_as(&key, &value)?),
                "lambda_max" => raw.lambda_max = Some(parse_as(&key, &value)?),
                "lambda_count" => raw.lambda_count = Some(parse_as(&key, &value)?),
                "lambda_spacing" => raw.lambda_spacing = Some(value),
                other => return Err(format!("unknown config key: {other}")),
            }
        }
        Ok(raw)
    }

    /// Later (flag) values override earlier (file) ones.
    pub fn overlay(mut self, flags: Raw) -> Raw {
        macro_rules! take {
            ($field:ident) => {
                if flags.$field.is_some() {
                    self.$field = flags.$field;
                }
            };
        }
        take!(lambda);
        take!(epsilon);
        take!(q);
        take!(u0);
        take!(nx);
        take!(neta);
        take!(dt_init);
        take!(dt_min);
        take!(dt_max);
        take!(t_max);
        take!(touch_eps);
        take!(cfl_source);
        take!(out);
        take!(snapshot_stride);
        take!(workers);
        take!(lambdas);
        take!(lambda_min);
        take!(lambda_max);
        take!(lambda_count);
        take!(lambda_spacing);
        self
    }
}

/// Fully resolved single-run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub q: f64,
    pub u0: U0Spec,
    pub nx: usize,
    pub neta: usize,
    pub controls: StepControls,
    pub out: PathBuf,
    pub snapshot_stride: usize,
}

pub fn resolve_run(raw: &Raw) -> Result<RunConfig, String> {
    let lambda = raw.lambda.ok_or("missing required key: lambda")?;
    if !(lambda > 0.0) {
        return Err(format!("config key lambda: must be positive, got {lambda}"));
    }
    let epsilon = raw.epsilon.unwrap_or(0.1);
    if !(epsilon >= 0.0) {
        return Err(format!(
            "config key epsilon: must be non-negative, got {epsilon}"
        ));
    }
    let q = raw.q.unwrap_or(4.0);
    if !(q > 2.0) {
        return Err(format!("config key q: must exceed 2, got {q}"));
    }
    let u0 = U0Spec::parse(raw.u0.as_deref().unwrap_or("zero"))?;
    let controls = StepControls {
        dt_init: raw.dt_init.unwrap_or(1e-3),
        dt_min: raw.dt_min.unwrap_or(1e-10),
        dt_max: raw.dt_max.unwrap_or(1e-2),
        touch_eps: raw.touch_eps.unwrap_or(5e-3),
        cfl_source: raw.cfl_source.unwrap_or(0.1),
        t_max: raw.t_max.unwrap_or(10.0),
    };
    controls.validate().map_err(|e| e.to_string())?;
    Ok(RunConfig {
        lambda,
        epsilon,
        q,
        u0,
        nx: raw.nx.unwrap_or(201),
        neta: raw.neta.unwrap_or(101),
        controls,
        out: raw.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        snapshot_stride: raw.snapshot_stride.unwrap_or(10),
    })
}

/// Sweep = base run configuration + lambda schedule + worker count.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub lambdas: Vec<f64>,
    pub workers: usize,
}

pub fn resolve_sweep(raw: &Raw) -> Result<SweepConfig, String> {
    // the base needs a lambda even though the schedule replaces it
    let mut base_raw = raw.clone();
    if base_raw.lambda.is_none() {
        base_raw.lambda = Some(1.0);
    }
    let base = resolve_run(&base_raw)?;

    let mut lambdas: Vec<f64> = Vec::new();
    if let Some(list) = &raw.lambdas {
        for part in list.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            lambdas.push(
                part.parse::<f64>()
                    .map_err(|_| format!("config key lambdas: malformed value {part:?}"))?,
            );
        }
    } else if let (Some(lo), Some(hi), Some(count)) =
        (raw.lambda_min, raw.lambda_max, raw.lambda_count)
    {
        if count < 2 || !(hi > lo) {
            return Err("lambda range needs lambda_min < lambda_max and lambda_count >= 2".into());
        }
        let spacing = raw.lambda_spacing.as_deref().unwrap_or("linear");
        match spacing {
            "linear" => {
                for k in 0..count {
                    lambdas.push(lo + (hi - lo) * k as f64 / (count - 1) as f64);
                }
            }
            "geometric" => {
                if !(lo > 0.0) {
                    return Err("geometric spacing needs lambda_min > 0".into());
                }
                let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
                for k in 0..count {
                    lambdas.push(lo * ratio.powi(k as i32));
                }
            }
            other => {
                return Err(format!(
                    "config key lambda_spacing: expected linear or geometric, got {other:?}"
                ))
            }
        }
    }
    if lambdas.is_empty() {
        return Err("sweep needs a non-empty lambda list (lambdas or lambda_min/max/count)".into());
    }
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err("config key lambdas: all values must be positive".into());
    }
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite lambdas"));

    let workers = match std::env::var("MEMS_SIM_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .map_err(|_| format!("MEMS_SIM_THREADS: malformed value {v:?}"))?,
        Err(_) => raw.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        }),
    };
    if workers == 0 {
        return Err("worker count must be at least 1".into());
    }
    Ok(SweepConfig {
        base,
        lambdas,
        workers,
    })
}
