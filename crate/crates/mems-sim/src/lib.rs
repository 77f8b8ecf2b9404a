//! Simulator for an idealized electrostatic MEMS device: an elastic plate
//! clamped over a ground plate, deflected by the field in the gap between
//! them. A semilinear parabolic equation drives the plate profile while the
//! gap potential solves an anisotropic Laplace equation on the
//! deformation-dependent region; above an explicit voltage threshold the
//! coupled system develops a finite-time singularity (touchdown), and this
//! crate instruments trajectories with the energy machinery that certifies
//! it.

pub mod csvio;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fd;
pub mod grid;
pub mod linalg;
pub mod potential;
pub mod profiles;
pub mod quadrature;
pub mod state;
pub mod theory;
pub mod verification;

pub use diagnostics::{DiagnosticsRecord, Outcome, OutcomeKind, Trajectory};
pub use dynamics::{run_simulation, StepControls};
pub use error::{Result, SimError};
pub use grid::{Grid1D, MappedGrid};
pub use potential::{map_coefficients, solve_potential, PotentialField, SolveOptions};
pub use state::{DeflectionState, ModelParams};
pub use theory::{
    decay_envelope, dissipation_bound, energy, lambda_star, singularity_certificate,
    CertificateReport, DecayEnvelope, Eigenpair, ProofParams, PRINCIPAL_EIGENVALUE,
};

// The guide's code blocks run as doctests so the book cannot drift from the
// library. Each chapter becomes one hidden doctest container.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/model.md")]
    pub struct Model;
    #[doc = include_str!("../../../book/src/potential.md")]
    pub struct Potential;
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub struct Dynamics;
    #[doc = include_str!("../../../book/src/energy.md")]
    pub struct Energy;
    #[doc = include_str!("../../../book/src/threshold.md")]
    pub struct Threshold;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
