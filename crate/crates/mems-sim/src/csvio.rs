//! CSV serialization of trajectories, snapshots, and debug potential dumps.
//! Numbers carry 17 significant digits so cross-run diffs stay meaningful.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Result, SimError};
use crate::grid::MappedGrid;
use crate::potential::PotentialField;
use crate::state::DeflectionState;

/// Column order of the trajectory file; fixed schema.
pub const TRAJECTORY_HEADER: &str =
    "t,dt,min_u,max_u,E_alpha,dE_dt,F_of_E,envelope,sobolev_proxy";

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(e: std::io::Error) -> SimError {
    SimError::InvalidInput(format!("io error: {e}"))
}

pub fn write_trajectory(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(w, "{TRAJECTORY_HEADER}").map_err(io_err)?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_float(r.t),
            fmt_float(r.dt),
            fmt_float(r.min_u),
            fmt_float(r.max_u),
            fmt_float(r.e_alpha),
            fmt_float(r.de_dt),
            fmt_float(r.f_of_e),
            fmt_float(r.envelope),
            fmt_float(r.sobolev_proxy),
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn parse_field(field: &str, line_no: usize, name: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        SimError::InvalidInput(format!(
            "trajectory line {line_no}: bad value for {name}: {field:?}"
        ))
    })
}

pub fn read_trajectory(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| SimError::InvalidInput("empty trajectory file".into()))?
        .map_err(io_err)?;
    if header.trim() != TRAJECTORY_HEADER {
        return Err(SimError::InvalidInput(format!(
            "unexpected trajectory header: {header:?}"
        )));
    }
    let names = TRAJECTORY_HEADER.split(',').collect::<Vec<_>>();
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(SimError::InvalidInput(format!(
                "trajectory line {}: expected {} columns, found {}",
                k + 2,
                names.len(),
                fields.len()
            )));
        }
        let get = |idx: usize| parse_field(fields[idx], k + 2, names[idx]);
        records.push(DiagnosticsRecord {
            t: get(0)?,
            dt: get(1)?,
            min_u: get(2)?,
            max_u: get(3)?,
            e_alpha: get(4)?,
            de_dt: get(5)?,
            f_of_e: get(6)?,
            envelope: get(7)?,
            sobolev_proxy: get(8)?,
            envelope_violation: false,
            dissipation_violation: false,
        });
    }
    Ok(records)
}

pub fn write_snapshot(path: &Path, xs: &[f64], state: &DeflectionState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(w, "x,u").map_err(io_err)?;
    for (x, u) in xs.iter().zip(&state.u) {
        writeln!(w, "{},{}", fmt_float(*x), fmt_float(*u)).map_err(io_err)?;
    }
    Ok(())
}

/// Reads an (x, u) table; returns the two columns.
pub fn read_snapshot(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (k == 0 && trimmed.starts_with('x')) {
            continue;
        }
        let mut parts = trimmed.split(',');
        let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
            return Err(SimError::InvalidInput(format!(
                "snapshot line {}: expected two columns",
                k + 1
            )));
        };
        xs.push(parse_field(a, k + 1, "x")?);
        us.push(parse_field(b, k + 1, "u")?);
    }
    if xs.is_empty() {
        return Err(SimError::InvalidInput("snapshot file has no rows".into()));
    }
    Ok((xs, us))
}

/// Debug dump of the mapped potential (columns x, eta, phi).
pub fn write_potential(path: &Path, grid: &MappedGrid, field: &PotentialField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(w, "x,eta,phi").map_err(io_err)?;
    for i in 0..grid.n_x() {
        for j in 0..grid.n_eta() {
            writeln!(
                w,
                "{},{},{}",
                fmt_float(grid.base().node(i)),
                fmt_float(grid.eta(j)),
                fmt_float(field.phi[[i, j]])
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}
