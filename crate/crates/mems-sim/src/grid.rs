//! Uniform grids: the plate interval [-1, 1] and the mapped gap rectangle
//! [-1, 1] x [0, 1].

use crate::error::{Result, SimError};

/// Uniform node set on the plate interval [-1, 1].
///
/// The node count is odd so the midpoint x = 0 is a grid node, and at least
/// 33 so second-order stencils have headroom.
#[derive(Debug, Clone)]
pub struct Grid1D {
    nodes: Vec<f64>,
    spacing: f64,
}

impl Grid1D {
    pub fn new(n_x: usize) -> Result<Self> {
        if n_x < 33 || n_x % 2 == 0 {
            return Err(SimError::InvalidInput(format!(
                "nx must be odd and >= 33, got {n_x}"
            )));
        }
        let spacing = 2.0 / (n_x - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_x).map(|i| -1.0 + i as f64 * spacing).collect();
        nodes[0] = -1.0;
        nodes[n_x - 1] = 1.0;
        Ok(Grid1D { nodes, spacing })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Index of the midpoint node x = 0.
    pub fn mid(&self) -> usize {
        (self.len() - 1) / 2
    }
}

/// Tensor grid for the pulled-back gap: the base plate grid crossed with a
/// uniform vertical coordinate on [0, 1].
#[derive(Debug, Clone)]
pub struct MappedGrid {
    base: Grid1D,
    etas: Vec<f64>,
    d_eta: f64,
}

impl MappedGrid {
    pub fn new(n_x: usize, n_eta: usize) -> Result<Self> {
        let base = Grid1D::new(n_x)?;
        if n_eta < 17 {
            return Err(SimError::InvalidInput(format!(
                "neta must be >= 17, got {n_eta}"
            )));
        }
        let d_eta = 1.0 / (n_eta - 1) as f64;
        let mut etas: Vec<f64> = (0..n_eta).map(|j| j as f64 * d_eta).collect();
        etas[0] = 0.0;
        etas[n_eta - 1] = 1.0;
        Ok(MappedGrid { base, etas, d_eta })
    }

    pub fn base(&self) -> &Grid1D {
        &self.base
    }

    pub fn n_x(&self) -> usize {
        self.base.len()
    }

    pub fn n_eta(&self) -> usize {
        self.etas.len()
    }

    pub fn d_eta(&self) -> f64 {
        self.d_eta
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn eta(&self, j: usize) -> f64 {
        self.etas[j]
    }
}
