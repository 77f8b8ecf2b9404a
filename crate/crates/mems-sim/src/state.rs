//! Plate state and physical parameters.

use crate::error::{Result, SimError};
use crate::grid::Grid1D;

/// Plate profile u on the 1D grid at one time instant.
///
/// Invariants: clamped ends u(±1) = 0 and min u > -1 (the plate stays above
/// the ground plate). Stepping routines may emit states that dip below -1;
/// those are built unchecked and classified upstream.
#[derive(Debug, Clone)]
pub struct DeflectionState {
    pub t: f64,
    pub u: Vec<f64>,
}

impl DeflectionState {
    pub fn new(t: f64, mut u: Vec<f64>, grid: &Grid1D) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(SimError::InvalidInput(format!(
                "deflection has {} values, grid has {} nodes",
                u.len(),
                grid.len()
            )));
        }
        let n = u.len();
        if u[0].abs() > 1e-12 || u[n - 1].abs() > 1e-12 {
            return Err(SimError::InvalidInput(format!(
                "clamped ends must vanish, got u(-1) = {:.3e}, u(1) = {:.3e}",
                u[0],
                u[n - 1]
            )));
        }
        u[0] = 0.0;
        u[n - 1] = 0.0;
        if !u.iter().all(|v| v.is_finite()) {
            return Err(SimError::NonFinite {
                context: "deflection state",
            });
        }
        let min = u.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= -1.0 {
            return Err(SimError::InvalidInput(format!(
                "plate below ground: min u = {min:.6}"
            )));
        }
        Ok(DeflectionState { t, u })
    }

    /// Builds without the min u > -1 check; boundary values are forced to 0.
    pub(crate) fn new_unchecked(t: f64, mut u: Vec<f64>) -> Self {
        let n = u.len();
        u[0] = 0.0;
        u[n - 1] = 0.0;
        DeflectionState { t, u }
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest gap between the plates, min(1 + u).
    pub fn min_gap(&self) -> f64 {
        1.0 + self.min_u()
    }

    /// (max u)_+ , the quantity the decay envelope is built from.
    pub fn max_u_pos(&self) -> f64 {
        self.max_u().max(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|v| v.is_finite())
    }
}

/// Physical inputs of a run.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    /// Applied-voltage parameter (> 0).
    pub lambda: f64,
    /// Aspect ratio of the device (>= 0; 0 selects the reduced model with the
    /// closed-form potential).
    pub epsilon: f64,
    /// Exponent of the blow-up proxy norm (> 2).
    pub q: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, epsilon: f64, q: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(SimError::InvalidInput(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !(epsilon >= 0.0) {
            return Err(SimError::InvalidInput(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        if !(q > 2.0) {
            return Err(SimError::InvalidInput(format!("q must exceed 2, got {q}")));
        }
        Ok(ModelParams { lambda, epsilon, q })
    }

    /// True when the reduced (vanishing aspect ratio) force is in effect.
    pub fn is_reduced(&self) -> bool {
        self.epsilon == 0.0
    }
}
