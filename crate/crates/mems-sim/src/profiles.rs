//! Initial plate shapes: rest, arch, bell bump, scaled eigenfunction, and
//! tabulated data interpolated onto the grid.

use std::f64::consts::PI;

use crate::error::{Result, SimError};
use crate::grid::Grid1D;
use crate::state::DeflectionState;

/// Flat plate at rest.
pub fn zero(grid: &Grid1D) -> DeflectionState {
    DeflectionState::new(0.0, vec![0.0; grid.len()], grid).expect("zero profile is admissible")
}

/// Snap-through arch h(1 + cos(pi x)).
pub fn arch(grid: &Grid1D, h: f64) -> Result<DeflectionState> {
    let u = grid.nodes().iter().map(|&x| h * (1.0 + (PI * x).cos())).collect();
    DeflectionState::new(0.0, u, grid)
}

/// Smooth bump a (exp(-(x/w)^2) - exp(-1/w^2)); the offset makes it vanish
/// at the clamped ends.
pub fn bell(grid: &Grid1D, amplitude: f64, width: f64) -> Result<DeflectionState> {
    if !(width > 0.0) {
        return Err(SimError::InvalidInput(format!(
            "bell width must be positive, got {width}"
        )));
    }
    let edge = (-1.0 / (width * width)).exp();
    let u = grid
        .nodes()
        .iter()
        .map(|&x| amplitude * ((-(x / width).powi(2)).exp() - edge))
        .collect();
    DeflectionState::new(0.0, u, grid)
}

/// Scaled principal eigenfunction c * (pi/4) cos(pi x / 2).
pub fn eigenfunction(grid: &Grid1D, scale: f64) -> Result<DeflectionState> {
    let u = grid
        .nodes()
        .iter()
        .map(|&x| scale * PI / 4.0 * (PI * x / 2.0).cos())
        .collect();
    DeflectionState::new(0.0, u, grid)
}

/// Linear interpolation of tabulated (x, u) samples onto the grid. The table
/// must cover [-1, 1] and be strictly increasing in x.
pub fn tabulated(grid: &Grid1D, xs: &[f64], us: &[f64]) -> Result<DeflectionState> {
    if xs.len() != us.len() || xs.len() < 2 {
        return Err(SimError::InvalidInput(
            "tabulated profile needs matching x and u columns with at least 2 rows".into(),
        ));
    }
    if !xs.windows(2).all(|w| w[1] > w[0]) {
        return Err(SimError::InvalidInput(
            "tabulated x values must be strictly increasing".into(),
        ));
    }
    if xs[0] > -1.0 + 1e-12 || xs[xs.len() - 1] < 1.0 - 1e-12 {
        return Err(SimError::InvalidInput(
            "tabulated profile must cover [-1, 1]".into(),
        ));
    }
    let u = grid
        .nodes()
        .iter()
        .map(|&x| {
            let k = match xs.partition_point(|&v| v <= x) {
                0 => 1,
                k if k >= xs.len() => xs.len() - 1,
                k => k,
            };
            let (x0, x1) = (xs[k - 1], xs[k]);
            let s = (x - x0) / (x1 - x0);
            us[k - 1] * (1.0 - s) + us[k] * s
        })
        .collect();
    DeflectionState::new(0.0, u, grid)
}
