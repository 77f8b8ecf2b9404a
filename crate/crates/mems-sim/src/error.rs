use thiserror::Error;

/// Errors surfaced by the solver and stepping layers.
#[derive(Debug, Error)]
pub enum SimError {
    /// The gap min(1+u) fell below the solvable clearance; near touchdown
    /// classification happens upstream instead of solving.
    #[error("degenerate geometry: min(1+u) = {min_gap:.3e} below clearance {clearance:.3e}")]
    DegenerateGeometry { min_gap: f64, clearance: f64 },

    /// The linear solver did not reach its residual target.
    #[error(
        "linear solver stalled after {iterations} iterations (residual {residual:.3e}, target {target:.3e})"
    )]
    SolverStalled {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    /// A parameter or state violated one of its invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation produced NaN or infinity.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
}

pub type Result<T> = std::result::Result<T, SimError>;
