//! Trapezoid quadrature on the plate interval. Volume integrals over the gap
//! use these weights in x together with per-column vertical rules (see the
//! theory module), matching the O(h^2) order of the spatial scheme.

use crate::grid::Grid1D;

/// Trapezoid weights: h at interior nodes, h/2 at the ends.
pub fn weights(grid: &Grid1D) -> Vec<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

pub fn trapezoid(grid: &Grid1D, values: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), grid.len());
    let h = grid.spacing();
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (0.5 * values[0] + inner + 0.5 * values[n - 1])
}
