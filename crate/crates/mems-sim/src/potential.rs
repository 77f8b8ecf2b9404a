//! The gap potential: an anisotropic Laplace equation posed on the region
//! between the plates, pulled back to the fixed rectangle `[-1,1] x [0,1]`.
//!
//! With the vertical coordinate eta = (1+z)/(1+u(x)), the potential
//! phi(x, eta) = psi(x, z) satisfies
//!
//! ```text
//! eps^2 phi_xx + A phi_xeta + B phi_etaeta + C phi_eta = 0
//! A = -2 eps^2 eta u_x / (1+u)
//! B = eps^2 eta^2 u_x^2 / (1+u)^2 + 1/(1+u)^2
//! C = eps^2 ( -eta u_xx/(1+u) + 2 eta u_x^2/(1+u)^2 )
//! ```
//!
//! and the boundary data collapses to the single smooth function phi = eta on
//! all four sides. The plate is forced through the trace quantities
//! gamma_m(x) = phi_eta(x, 1)/(1+u(x)) and g = (1 + eps^2 u_x^2) gamma_m^2.
//! For eps = 0 the solve is bypassed: phi = eta and gamma_m = 1/(1+u) exactly.

use ndarray::Array2;

use crate::error::{Result, SimError};
use crate::fd;
use crate::grid::MappedGrid;
use crate::linalg::{bicgstab, CsrBuilder, Ilu0, SolveStats};
use crate::state::{DeflectionState, ModelParams};

/// Knobs for the elliptic solve. Defaults match the solver contract:
/// max-norm residual 1e-10 on the row-equilibrated system, and a refusal to
/// solve once the gap closes below `floor_clearance`.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub floor_clearance: f64,
    pub residual_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            floor_clearance: 1e-4,
            residual_tol: 1e-10,
            max_iterations: 20_000,
        }
    }
}

/// Coefficients of the pulled-back operator on the tensor grid.
#[derive(Debug, Clone)]
pub struct CoefficientFields {
    /// Coefficient of phi_xx (constant eps^2).
    pub xx: f64,
    /// Coefficient of the mixed derivative phi_xeta.
    pub cross: Array2<f64>,
    /// Coefficient of phi_etaeta.
    pub vertical: Array2<f64>,
    /// Coefficient of phi_eta.
    pub drift: Array2<f64>,
}

fn check_clearance(u: &DeflectionState, clearance: f64) -> Result<()> {
    let min_gap = u.min_gap();
    if min_gap < clearance {
        return Err(SimError::DegenerateGeometry {
            min_gap,
            clearance,
        });
    }
    Ok(())
}

/// Evaluates the transformed-operator coefficients from the plate profile,
/// using central differences for u_x and u_xx.
pub fn map_coefficients(
    u: &DeflectionState,
    epsilon: f64,
    grid: &MappedGrid,
    floor_clearance: f64,
) -> Result<CoefficientFields> {
    check_clearance(u, floor_clearance)?;
    let n_x = grid.n_x();
    let n_eta = grid.n_eta();
    let h = grid.base().spacing();
    let ux = fd::gradient(&u.u, h);
    let uxx = fd::laplacian(&u.u, h);
    let e2 = epsilon * epsilon;

    let mut cross = Array2::zeros((n_x, n_eta));
    let mut vertical = Array2::zeros((n_x, n_eta));
    let mut drift = Array2::zeros((n_x, n_eta));
    for i in 0..n_x {
        let gap = 1.0 + u.u[i];
        let slope = ux[i] / gap;
        for j in 0..n_eta {
            let eta = grid.eta(j);
            cross[[i, j]] = -2.0 * e2 * eta * slope;
            vertical[[i, j]] = e2 * eta * eta * slope * slope + 1.0 / (gap * gap);
            drift[[i, j]] = e2 * eta * (-uxx[i] / gap + 2.0 * slope * slope);
        }
    }
    Ok(CoefficientFields {
        xx: e2,
        cross,
        vertical,
        drift,
    })
}

/// Mapped potential plus the derived trace quantities.
#[derive(Debug, Clone)]
pub struct PotentialField {
    /// phi(x_i, eta_j), an n_x x n_eta array.
    pub phi: Array2<f64>,
    /// Vertical trace gradient on the plate, gamma_m > 0.
    pub gamma_m: Vec<f64>,
    /// Electrostatic force density g = (1 + eps^2 u_x^2) gamma_m^2 >= 0.
    pub g: Vec<f64>,
    /// Iterations and final residual of the linear solve (zeros for the
    /// closed-form eps = 0 path).
    pub iterations: usize,
    pub residual: f64,
}

impl PotentialField {
    /// How far phi escapes [0, 1]; 0 when the discrete maximum principle
    /// holds exactly.
    pub fn max_principle_excess(&self) -> f64 {
        let mut low = 0.0f64;
        let mut high = 0.0f64;
        for &v in self.phi.iter() {
            low = low.max(-v);
            high = high.max(v - 1.0);
        }
        low.max(high).max(0.0)
    }
}

/// Field of eta values, the boundary interpolant and warm-start guess.
fn eta_field(grid: &MappedGrid) -> Array2<f64> {
    let mut phi = Array2::zeros((grid.n_x(), grid.n_eta()));
    for i in 0..grid.n_x() {
        for j in 0..grid.n_eta() {
            phi[[i, j]] = grid.eta(j);
        }
    }
    phi
}

/// Solves the pulled-back potential problem with Dirichlet data phi = eta.
/// `forcing` is an optional interior source used by manufactured-solution
/// tests; production solves pass `None`. The eps = 0 path is closed-form
/// and ignores any forcing.
pub fn solve_potential(
    u: &DeflectionState,
    params: &ModelParams,
    grid: &MappedGrid,
    forcing: Option<&Array2<f64>>,
) -> Result<PotentialField> {
    solve_potential_with(u, params, grid, forcing, &SolveOptions::default(), None)
}

/// As `solve_potential`, with explicit options and an optional warm start
/// (the previous time step's phi).
pub fn solve_potential_with(
    u: &DeflectionState,
    params: &ModelParams,
    grid: &MappedGrid,
    forcing: Option<&Array2<f64>>,
    opts: &SolveOptions,
    warm_start: Option<&Array2<f64>>,
) -> Result<PotentialField> {
    check_clearance(u, opts.floor_clearance)?;
    let n_x = grid.n_x();
    let n_eta = grid.n_eta();

    if params.is_reduced() {
        // eps = 0: the boundary data solves the problem exactly
        let phi = eta_field(grid);
        let gamma_m: Vec<f64> = u.u.iter().map(|&ui| 1.0 / (1.0 + ui)).collect();
        let g: Vec<f64> = gamma_m.iter().map(|&gm| gm * gm).collect();
        return Ok(PotentialField {
            phi,
            gamma_m,
            g,
            iterations: 0,
            residual: 0.0,
        });
    }

    let coefs = map_coefficients(u, params.epsilon, grid, opts.floor_clearance)?;
    let h = grid.base().spacing();
    let d_eta = grid.d_eta();
    let n = n_x * n_eta;
    let idx = |i: usize, j: usize| i * n_eta + j;

    let mut builder = CsrBuilder::new(n, 9 * n);
    let mut rhs = vec![0.0; n];
    for i in 0..n_x {
        for j in 0..n_eta {
            let m = idx(i, j);
            let on_boundary = i == 0 || i == n_x - 1 || j == 0 || j == n_eta - 1;
            if on_boundary {
                builder.push(m, 1.0);
                builder.finish_row();
                rhs[m] = grid.eta(j);
                continue;
            }
            let cxx = coefs.xx / (h * h);
            let cx_eta = coefs.cross[[i, j]] / (4.0 * h * d_eta);
            let cee = coefs.vertical[[i, j]] / (d_eta * d_eta);
            let ce = coefs.drift[[i, j]] / (2.0 * d_eta);
            builder.push(idx(i - 1, j - 1), cx_eta);
            builder.push(idx(i - 1, j), cxx);
            builder.push(idx(i - 1, j + 1), -cx_eta);
            builder.push(idx(i, j - 1), cee - ce);
            builder.push(m, -2.0 * cxx - 2.0 * cee);
            builder.push(idx(i, j + 1), cee + ce);
            builder.push(idx(i + 1, j - 1), -cx_eta);
            builder.push(idx(i + 1, j), cxx);
            builder.push(idx(i + 1, j + 1), cx_eta);
            builder.finish_row();
            rhs[m] = forcing.map_or(0.0, |f| f[[i, j]]);
        }
    }
    let mut matrix = builder.build();
    matrix.equilibrate_rows(&mut rhs);

    let guess = match warm_start {
        Some(w) if w.dim() == (n_x, n_eta) => w.iter().cloned().collect::<Vec<f64>>(),
        _ => eta_field(grid).iter().cloned().collect(),
    };
    let ilu = Ilu0::factor(&matrix)?;
    let (flat, stats): (Vec<f64>, SolveStats) = bicgstab(
        &matrix,
        &rhs,
        &guess,
        &ilu,
        opts.residual_tol,
        opts.max_iterations,
    )?;

    let phi = Array2::from_shape_vec((n_x, n_eta), flat)
        .map_err(|_| SimError::NonFinite { context: "potential reshape" })?;
    if !phi.iter().all(|v| v.is_finite()) {
        return Err(SimError::NonFinite {
            context: "potential solve",
        });
    }
    let gamma_m = trace_gradient(&phi, u, grid);
    let g = electrostatic_force(u, &gamma_m, params.epsilon, grid);
    Ok(PotentialField {
        phi,
        gamma_m,
        g,
        iterations: stats.iterations,
        residual: stats.residual,
    })
}

/// Vertical derivative of the physical potential evaluated on the plate:
/// gamma_m(x_i) = phi_eta(x_i, 1) / (1 + u_i), with the one-sided
/// second-order stencil at the top row.
pub fn trace_gradient(phi: &Array2<f64>, u: &DeflectionState, grid: &MappedGrid) -> Vec<f64> {
    let n_eta = grid.n_eta();
    let d_eta = grid.d_eta();
    let top = n_eta - 1;
    (0..grid.n_x())
        .map(|i| {
            let d_phi = (3.0 * phi[[i, top]] - 4.0 * phi[[i, top - 1]] + phi[[i, top - 2]])
                / (2.0 * d_eta);
            d_phi / (1.0 + u.u[i])
        })
        .collect()
}

/// Force density g_i = (1 + eps^2 (u_x)_i^2) gamma_i^2.
pub fn electrostatic_force(
    u: &DeflectionState,
    gamma_m: &[f64],
    epsilon: f64,
    grid: &MappedGrid,
) -> Vec<f64> {
    let ux = fd::gradient(&u.u, grid.base().spacing());
    let e2 = epsilon * epsilon;
    gamma_m
        .iter()
        .zip(&ux)
        .map(|(&gm, &d)| (1.0 + e2 * d * d) * gm * gm)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MappedGrid;
    use crate::state::DeflectionState;
    use std::f64::consts::PI;

    fn flat(grid: &MappedGrid) -> DeflectionState {
        DeflectionState::new(0.0, vec![0.0; grid.n_x()], grid.base()).unwrap()
    }

    fn cosine_plate(grid: &MappedGrid, depth: f64) -> DeflectionState {
        let u = grid
            .base()
            .nodes()
            .iter()
            .map(|&x| -depth * (PI * x / 2.0).cos())
            .collect();
        DeflectionState::new(0.0, u, grid.base()).unwrap()
    }

    #[test]
    fn flat_plate_coefficients_are_identity() {
        let grid = MappedGrid::new(33, 17).unwrap();
        let u = flat(&grid);
        let c = map_coefficients(&u, 0.7, &grid, 1e-4).unwrap();
        for i in 0..grid.n_x() {
            for j in 0..grid.n_eta() {
                assert_eq!(c.cross[[i, j]], 0.0);
                assert_eq!(c.drift[[i, j]], 0.0);
                assert!((c.vertical[[i, j]] - 1.0).abs() < 1e-15);
            }
        }
        assert!((c.xx - 0.49).abs() < 1e-15);
    }

    #[test]
    fn reduced_model_coefficients_are_vertical_only() {
        let grid = MappedGrid::new(33, 17).unwrap();
        let u = cosine_plate(&grid, 0.4);
        let c = map_coefficients(&u, 0.0, &grid, 1e-4).unwrap();
        assert_eq!(c.xx, 0.0);
        for i in 0..grid.n_x() {
            let gap = 1.0 + u.u[i];
            for j in 0..grid.n_eta() {
                assert_eq!(c.cross[[i, j]], 0.0);
                assert_eq!(c.drift[[i, j]], 0.0);
                assert!((c.vertical[[i, j]] - 1.0 / (gap * gap)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn midpoint_vertical_coefficient_for_half_gap() {
        // u = -0.5 cos(pi x/2): at x = 0 the slope vanishes and 1+u = 1/2,
        // so the phi_etaeta coefficient is exactly 4 there.
        let grid = MappedGrid::new(65, 17).unwrap();
        let u = cosine_plate(&grid, 0.5);
        let c = map_coefficients(&u, 0.3, &grid, 1e-4).unwrap();
        let mid = grid.base().mid();
        for j in 0..grid.n_eta() {
            assert!(
                (c.vertical[[mid, j]] - 4.0).abs() < 1e-10,
                "j = {j}: {}",
                c.vertical[[mid, j]]
            );
            assert!(c.vertical[[mid, j]] >= 4.0 - 1e-10);
        }
    }

    #[test]
    fn rejects_degenerate_geometry() {
        let grid = MappedGrid::new(33, 17).unwrap();
        let mut u = vec![0.0; 33];
        u[16] = -1.0 + 5e-5;
        let state = DeflectionState::new(0.0, u, grid.base()).unwrap();
        match map_coefficients(&state, 0.1, &grid, 1e-4) {
            Err(SimError::DegenerateGeometry { .. }) => {}
            other => panic!("expected degenerate geometry, got {other:?}"),
        }
    }

    #[test]
    fn flat_plate_solution_is_exact() {
        let grid = MappedGrid::new(101, 41).unwrap();
        let u = flat(&grid);
        for &eps in &[0.01, 0.1, 1.0] {
            let params = ModelParams::new(1.0, eps, 4.0).unwrap();
            let field = solve_potential(&u, &params, &grid, None).unwrap();
            let mut worst = 0.0f64;
            for i in 0..grid.n_x() {
                for j in 0..grid.n_eta() {
                    worst = worst.max((field.phi[[i, j]] - grid.eta(j)).abs());
                }
            }
            assert!(worst <= 1e-9, "eps {eps}: max|phi - eta| = {worst:.3e}");
            for &gm in &field.gamma_m {
                assert!((gm - 1.0).abs() <= 1e-8);
            }
            for &gi in &field.g {
                assert!((gi - 1.0).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn reduced_model_closed_form() {
        let grid = MappedGrid::new(65, 17).unwrap();
        let u = cosine_plate(&grid, 0.3);
        let params = ModelParams::new(2.0, 0.0, 4.0).unwrap();
        let field = solve_potential(&u, &params, &grid, None).unwrap();
        for i in 0..grid.n_x() {
            let gap = 1.0 + u.u[i];
            assert!((field.gamma_m[i] - 1.0 / gap).abs() < 1e-14);
            assert!((field.g[i] - 1.0 / (gap * gap)).abs() < 1e-13);
            for j in 0..grid.n_eta() {
                assert_eq!(field.phi[[i, j]], grid.eta(j));
            }
        }
    }

    #[test]
    fn trace_gradient_approaches_reduced_form_quadratically_in_eps() {
        let grid = MappedGrid::new(201, 101).unwrap();
        let u = cosine_plate(&grid, 0.3);
        let dev = |eps: f64| -> f64 {
            let params = ModelParams::new(1.0, eps, 4.0).unwrap();
            let field = solve_potential(&u, &params, &grid, None).unwrap();
            field
                .gamma_m
                .iter()
                .zip(&u.u)
                .map(|(&gm, &ui)| (gm - 1.0 / (1.0 + ui)).abs())
                .fold(0.0f64, f64::max)
        };
        let d1 = dev(0.1);
        let d2 = dev(0.05);
        let ratio = d1 / d2;
        assert!(
            (3.0..=5.0).contains(&ratio),
            "expected ~4x reduction, got {ratio} ({d1:.3e} vs {d2:.3e})"
        );
    }

    #[test]
    fn force_matches_reduced_form_within_eps_squared() {
        let grid = MappedGrid::new(201, 101).unwrap();
        let u = cosine_plate(&grid, 0.3);
        let params = ModelParams::new(1.0, 0.1, 4.0).unwrap();
        let field = solve_potential(&u, &params, &grid, None).unwrap();
        let worst = field
            .g
            .iter()
            .zip(&u.u)
            .map(|(&gi, &ui)| (gi - 1.0 / ((1.0 + ui) * (1.0 + ui))).abs())
            .fold(0.0f64, f64::max);
        // O(eps^2) with an O(1) constant
        assert!(worst < 0.05, "deviation {worst:.3e}");
        assert!(worst > 1e-6, "deviation suspiciously small: {worst:.3e}");
    }

    #[test]
    fn maximum_principle_and_positive_trace_on_steep_plate() {
        let grid = MappedGrid::new(101, 51).unwrap();
        // ||u_x||_inf <= 2 family member with both signs of slope
        let u: Vec<f64> = grid
            .base()
            .nodes()
            .iter()
            .map(|&x| -0.6 * (PI * x / 2.0).cos() + 0.2 * (PI * x).sin())
            .collect();
        let state = DeflectionState::new(0.0, u, grid.base()).unwrap();
        for &eps in &[0.1, 0.5, 1.0] {
            let params = ModelParams::new(1.0, eps, 4.0).unwrap();
            let field = solve_potential(&state, &params, &grid, None).unwrap();
            assert!(
                field.max_principle_excess() <= 1e-6,
                "eps {eps}: excess {:.3e}",
                field.max_principle_excess()
            );
            assert!(field.gamma_m.iter().all(|&gm| gm > 0.0), "eps {eps}");
        }
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let coarse = crate::verification::manufactured_error(65, 33, 0.1).unwrap();
        let fine = crate::verification::manufactured_error(129, 65, 0.1).unwrap();
        let ratio = coarse / fine;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "order ratio {ratio} (coarse {coarse:.3e}, fine {fine:.3e})"
        );
    }
}

#[cfg(test)]
mod property_tests {
    use super::*;
    use crate::grid::MappedGrid;
    use crate::state::{DeflectionState, ModelParams};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    // three-mode profiles vanishing at the ends; the amplitude box keeps
    // ||u||_inf <= 0.75 and ||u_x||_inf <= 2
    fn modal_plate(grid: &MappedGrid, amps: [f64; 3]) -> DeflectionState {
        let u = grid
            .base()
            .nodes()
            .iter()
            .map(|&x| {
                amps.iter()
                    .enumerate()
                    .map(|(k, &a)| a * ((k + 1) as f64 * PI * (x + 1.0) / 2.0).sin())
                    .sum()
            })
            .collect();
        DeflectionState::new(0.0, u, grid.base()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn maximum_principle_and_positive_trace_hold(
            a1 in -0.4f64..0.4,
            a2 in -0.2f64..0.2,
            a3 in -0.1f64..0.1,
            eps in 0.05f64..1.0,
        ) {
            let grid = MappedGrid::new(65, 33).unwrap();
            let state = modal_plate(&grid, [a1, a2, a3]);
            let params = ModelParams::new(1.0, eps, 4.0).unwrap();
            let field = solve_potential(&state, &params, &grid, None).unwrap();
            prop_assert!(
                field.max_principle_excess() <= 1e-6,
                "excess {:.3e}",
                field.max_principle_excess()
            );
            prop_assert!(field.gamma_m.iter().all(|&gm| gm > 0.0));
            prop_assert!(field.g.iter().all(|&gi| gi >= 0.0));
        }
    }
}
