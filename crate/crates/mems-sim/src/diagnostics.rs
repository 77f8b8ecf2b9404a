//! Per-step observables, full run records, and run classification.

use serde::Serialize;

use crate::state::{DeflectionState, ModelParams};
use crate::theory::{DecayEnvelope, ProofParams};

/// Observables attached to every accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Step size that produced this record (0 for the initial record).
    pub dt: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// Weighted energy at the proof-side weight alpha.
    pub e_alpha: f64,
    /// Backward difference of the energy over the last accepted step.
    pub de_dt: f64,
    /// Dissipation bound evaluated at this record's energy.
    pub f_of_e: f64,
    /// Decay envelope C0 exp(-mu1 t).
    pub envelope: f64,
    pub sobolev_proxy: f64,
    pub envelope_violation: bool,
    pub dissipation_violation: bool,
}

/// Signs of the heat splitting carried along the run: u = v + w with v the
/// heat evolution of (u0)_+ and w the forced remainder.
#[derive(Debug, Clone, Copy)]
pub struct HeatSplitSample {
    pub t: f64,
    pub max_w: f64,
    pub min_v: f64,
    pub max_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutcomeKind {
    Touchdown,
    Survived,
    NumericalFailure,
}

impl std::fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutcomeKind::Touchdown => write!(f, "Touchdown"),
            OutcomeKind::Survived => write!(f, "Survived"),
            OutcomeKind::NumericalFailure => write!(f, "NumericalFailure"),
        }
    }
}

impl std::str::FromStr for OutcomeKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Touchdown" => Ok(OutcomeKind::Touchdown),
            "Survived" => Ok(OutcomeKind::Survived),
            "NumericalFailure" => Ok(OutcomeKind::NumericalFailure),
            other => Err(format!("unknown outcome kind: {other}")),
        }
    }
}

/// Terminal classification of a run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// Terminal time of the run.
    pub t_end: f64,
    pub detail: String,
}

/// Full record of one simulation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: ModelParams,
    pub proof: ProofParams,
    pub envelope: DecayEnvelope,
    pub records: Vec<DiagnosticsRecord>,
    /// Stored states at the snapshot stride; always includes the initial and
    /// terminal states.
    pub snapshots: Vec<DeflectionState>,
    pub splitting: Vec<HeatSplitSample>,
    pub grid_spacing: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &DeflectionState {
        self.snapshots.last().expect("trajectory stores at least the initial state")
    }
}
