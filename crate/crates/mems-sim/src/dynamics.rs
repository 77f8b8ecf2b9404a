//! Time integration of the plate equation: implicit diffusion, explicit
//! electrostatic force, adaptive steps that resolve the quenching timescale,
//! and classification of the finite-time singularity.

use crate::diagnostics::{
    DiagnosticsRecord, HeatSplitSample, Outcome, OutcomeKind, Trajectory,
};
use crate::error::{Result, SimError};
use crate::fd;
use crate::grid::MappedGrid;
use crate::potential::{solve_potential_with, PotentialField, SolveOptions};
use crate::state::{DeflectionState, ModelParams};
use crate::theory::{
    decay_envelope, dissipation_bound, energy, Eigenpair, ProofParams, ENVELOPE_TOL,
};

/// Step-size policy and stopping rules for a run.
#[derive(Debug, Clone, Copy)]
pub struct StepControls {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Touchdown clearance: the run is classified as touchdown once
    /// min(1+u) falls to this value.
    pub touch_eps: f64,
    /// Largest allowed relative change of min(1+u) per accepted step.
    pub cfl_source: f64,
    pub t_max: f64,
}

impl Default for StepControls {
    fn default() -> Self {
        StepControls {
            dt_init: 1e-3,
            dt_min: 1e-10,
            dt_max: 1e-2,
            touch_eps: 5e-3,
            cfl_source: 0.1,
            t_max: 10.0,
        }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(SimError::InvalidInput(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {:.3e} / {:.3e} / {:.3e}",
                self.dt_min, self.dt_init, self.dt_max
            )));
        }
        if !(self.touch_eps > 0.0 && self.touch_eps < 0.1) {
            return Err(SimError::InvalidInput(format!(
                "touch_eps must lie in (0, 0.1), got {}",
                self.touch_eps
            )));
        }
        if !(self.cfl_source > 0.0) {
            return Err(SimError::InvalidInput("cfl_source must be positive".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(SimError::InvalidInput("t_max must be positive".into()));
        }
        Ok(())
    }
}

/// Implicit-diffusion solve shared by the plate step and the heat evolution:
/// (I - dt L) out = rhs with homogeneous Dirichlet rows, L the 3-point
/// second difference.
fn implicit_diffusion_solve(rhs: &[f64], dt: f64, h: f64) -> Result<Vec<f64>> {
    let n = rhs.len();
    let r = dt / (h * h);
    let mut lower = vec![-r; n];
    let mut diag = vec![1.0 + 2.0 * r; n];
    let mut upper = vec![-r; n];
    diag[0] = 1.0;
    diag[n - 1] = 1.0;
    upper[0] = 0.0;
    lower[n - 1] = 0.0;
    let mut b = rhs.to_vec();
    b[0] = 0.0;
    b[n - 1] = 0.0;
    crate::linalg::solve_tridiagonal(&lower, &diag, &upper, &b)
}

/// One IMEX step: u' solves (I - dt L) u' = u - dt lambda g(u) with clamped
/// ends, the force held explicit at the current state. The result may dip
/// below -1; touchdown classification happens upstream.
pub fn imex_step(
    state: &DeflectionState,
    g: &[f64],
    dt: f64,
    lambda: f64,
    grid: &MappedGrid,
) -> Result<DeflectionState> {
    let h = grid.base().spacing();
    let rhs: Vec<f64> = state
        .u
        .iter()
        .zip(g)
        .map(|(&ui, &gi)| ui - dt * lambda * gi)
        .collect();
    let u = implicit_diffusion_solve(&rhs, dt, h)?;
    Ok(DeflectionState::new_unchecked(state.t + dt, u))
}

/// One homogeneous heat step with the same implicit scheme.
pub fn heat_step(v: &[f64], dt: f64, h: f64) -> Result<Vec<f64>> {
    implicit_diffusion_solve(v, dt, h)
}

/// Evolves zero-boundary data by the homogeneous heat equation to time `t`
/// using steps of at most `dt` (the last step shrinks to land exactly).
pub fn heat_evolve(v0: &[f64], t: f64, dt: f64, grid: &MappedGrid) -> Result<Vec<f64>> {
    let h = grid.base().spacing();
    let mut v = v0.to_vec();
    let mut remaining = t;
    while remaining > 1e-15 {
        let step = dt.min(remaining);
        v = heat_step(&v, step, h)?;
        remaining -= step;
    }
    Ok(v)
}

/// Reduced-model force magnitude lambda / (1+u)^2 nodewise; the stepper
/// applies the sign.
pub fn vanishing_aspect_rhs(state: &DeflectionState, lambda: f64) -> Vec<f64> {
    state
        .u
        .iter()
        .map(|&ui| lambda / ((1.0 + ui) * (1.0 + ui)))
        .collect()
}

/// Discrete stand-in for the second-order Sobolev norm:
/// (h sum |L u|^q)^(1/q) + max |u|.
pub fn sobolev_proxy(state: &DeflectionState, q: f64, grid: &MappedGrid) -> f64 {
    let h = grid.base().spacing();
    let lap = fd::laplacian(&state.u, h);
    let sum: f64 = lap[1..lap.len() - 1]
        .iter()
        .map(|&l| l.abs().powf(q))
        .sum();
    (h * sum).powf(1.0 / q) + state.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Proxy level that flags the Sobolev branch of the singularity dichotomy;
/// purely diagnostic.
pub const SOBOLEV_BLOWUP_THRESHOLD: f64 = 1e6;

/// Hard cap on accepted steps, a guard against runaway configurations.
const MAX_STEPS: usize = 5_000_000;

struct RecordBuilder {
    eig: Eigenpair,
    proof: ProofParams,
    envelope: crate::theory::DecayEnvelope,
    lambda: f64,
    epsilon: f64,
    q: f64,
    h: f64,
}

impl RecordBuilder {
    fn build(
        &self,
        state: &DeflectionState,
        dt: f64,
        prev: Option<&DiagnosticsRecord>,
        grid: &MappedGrid,
    ) -> DiagnosticsRecord {
        let e_alpha = energy(&self.eig, grid.base(), &state.u, self.proof.alpha);
        let de_dt = match prev {
            Some(p) if state.t > p.t => (e_alpha - p.e_alpha) / (state.t - p.t),
            _ => 0.0,
        };
        let f_of_e = dissipation_bound(
            e_alpha,
            self.proof.p,
            self.proof.delta,
            self.lambda,
            self.epsilon,
        )
        .unwrap_or(f64::NAN);
        let env = self.envelope.value(state.t);
        let envelope_violation = e_alpha > env + ENVELOPE_TOL;
        let dissipation_violation = match prev {
            Some(p) if state.t > p.t => {
                let tol = self.h * self.h + (state.t - p.t) + 1e-3 * (1.0 + p.f_of_e.abs());
                de_dt > p.f_of_e + tol
            }
            _ => false,
        };
        DiagnosticsRecord {
            t: state.t,
            dt,
            min_u: state.min_u(),
            max_u: state.max_u(),
            e_alpha,
            de_dt,
            f_of_e,
            envelope: env,
            sobolev_proxy: sobolev_proxy(state, self.q, grid),
            envelope_violation,
            dissipation_violation,
        }
    }
}

/// Runs the coupled system from `u0` until the horizon, touchdown, or a
/// numerical failure. Every accepted step appends a diagnostics record; the
/// heat part of the comparison splitting is co-evolved so its sign structure
/// can be checked afterwards. Failures never panic: the last good state is
/// retained and the outcome says what happened.
pub fn run_simulation(
    params: &ModelParams,
    u0: &DeflectionState,
    controls: &StepControls,
    grid: &MappedGrid,
    snapshot_stride: usize,
) -> Result<(Trajectory, Outcome)> {
    controls.validate()?;
    if u0.u.len() != grid.n_x() {
        return Err(SimError::InvalidInput(
            "initial state does not match the grid".into(),
        ));
    }
    let h = grid.base().spacing();
    let proof = ProofParams::derive(u0.max_u_pos(), params.epsilon, params.lambda)?;
    let envelope = decay_envelope(u0);
    let builder = RecordBuilder {
        eig: Eigenpair::on_grid(grid.base()),
        proof,
        envelope,
        lambda: params.lambda,
        epsilon: params.epsilon,
        q: params.q,
        h,
    };
    let stride = snapshot_stride.max(1);
    let solve_opts = SolveOptions::default();

    let mut trajectory = Trajectory {
        params: *params,
        proof,
        envelope,
        records: Vec::new(),
        snapshots: Vec::new(),
        splitting: Vec::new(),
        grid_spacing: h,
    };

    let mut state = DeflectionState {
        t: 0.0,
        u: u0.u.clone(),
    };
    let mut heat_part: Vec<f64> = u0.u.iter().map(|&v| v.max(0.0)).collect();
    let mut warm_phi: Option<ndarray::Array2<f64>> = None;
    let mut dt = controls.dt_init;
    let mut steps_since_snapshot = 0usize;

    let push_split = |traj: &mut Trajectory, s: &DeflectionState, v: &[f64]| {
        let max_w = s
            .u
            .iter()
            .zip(v)
            .map(|(&ui, &vi)| ui - vi)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_v = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_v = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        traj.splitting.push(HeatSplitSample {
            t: s.t,
            max_w,
            min_v,
            max_v,
        });
    };

    trajectory
        .records
        .push(builder.build(&state, 0.0, None, grid));
    trajectory.snapshots.push(state.clone());
    push_split(&mut trajectory, &state, &heat_part);

    let finish = |traj: &mut Trajectory, s: &DeflectionState, kind: OutcomeKind, detail: String| {
        if traj
            .snapshots
            .last()
            .map(|snap| snap.t < s.t)
            .unwrap_or(true)
        {
            traj.snapshots.push(s.clone());
        }
        Outcome {
            kind,
            t_end: s.t,
            detail,
        }
    };

    loop {
        if state.t >= controls.t_max * (1.0 - 1e-12) {
            let mut outcome = finish(
                &mut trajectory,
                &state,
                OutcomeKind::Survived,
                format!("reached horizon t = {}", controls.t_max),
            );
            outcome.t_end = controls.t_max;
            return Ok((trajectory, outcome));
        }
        if trajectory.records.len() >= MAX_STEPS {
            let outcome = finish(
                &mut trajectory,
                &state,
                OutcomeKind::NumericalFailure,
                format!("step budget exhausted after {MAX_STEPS} steps"),
            );
            return Ok((trajectory, outcome));
        }

        // force at the current state
        let force: Vec<f64> = if params.is_reduced() {
            state
                .u
                .iter()
                .map(|&ui| 1.0 / ((1.0 + ui) * (1.0 + ui)))
                .collect()
        } else {
            match solve_potential_with(&state, params, grid, None, &solve_opts, warm_phi.as_ref())
            {
                Ok(pot) => {
                    let PotentialField { phi, g, .. } = pot;
                    warm_phi = Some(phi);
                    g
                }
                Err(err) => {
                    let outcome = finish(
                        &mut trajectory,
                        &state,
                        OutcomeKind::NumericalFailure,
                        format!("potential solve failed: {err}"),
                    );
                    return Ok((trajectory, outcome));
                }
            }
        };

        // trial steps: shrink dt until the gap change per step is resolved
        let gap_before = state.min_gap();
        let remaining = controls.t_max - state.t;
        let mut dt_step = dt.min(remaining);
        let (candidate, change) = loop {
            let candidate = match imex_step(&state, &force, dt_step, params.lambda, grid) {
                Ok(c) => c,
                Err(err) => {
                    let outcome = finish(
                        &mut trajectory,
                        &state,
                        OutcomeKind::NumericalFailure,
                        format!("implicit step failed: {err}"),
                    );
                    return Ok((trajectory, outcome));
                }
            };
            if !candidate.is_finite() {
                let outcome = finish(
                    &mut trajectory,
                    &state,
                    OutcomeKind::NumericalFailure,
                    "non-finite state produced by the step".into(),
                );
                return Ok((trajectory, outcome));
            }
            let change = (candidate.min_gap() - gap_before).abs() / gap_before;
            let touches = candidate.min_gap() <= controls.touch_eps;
            if touches || change <= controls.cfl_source || dt_step <= controls.dt_min {
                break (candidate, change);
            }
            let factor = (controls.cfl_source / change).clamp(0.5, 0.95);
            dt_step = (dt_step * factor).max(controls.dt_min);
        };

        // accept
        heat_part = match heat_step(&heat_part, dt_step, h) {
            Ok(v) => v,
            Err(err) => {
                let outcome = finish(
                    &mut trajectory,
                    &state,
                    OutcomeKind::NumericalFailure,
                    format!("heat co-evolution failed: {err}"),
                );
                return Ok((trajectory, outcome));
            }
        };
        let prev_record = *trajectory.records.last().expect("initial record exists");
        state = candidate;
        trajectory
            .records
            .push(builder.build(&state, dt_step, Some(&prev_record), grid));
        push_split(&mut trajectory, &state, &heat_part);
        steps_since_snapshot += 1;
        if steps_since_snapshot >= stride {
            trajectory.snapshots.push(state.clone());
            steps_since_snapshot = 0;
        }

        if state.min_gap() <= controls.touch_eps {
            let outcome = finish(
                &mut trajectory,
                &state,
                OutcomeKind::Touchdown,
                format!(
                    "min(1+u) = {:.3e} reached the touchdown clearance {:.3e}",
                    state.min_gap(),
                    controls.touch_eps
                ),
            );
            return Ok((trajectory, outcome));
        }
        if dt_step <= controls.dt_min && remaining > controls.dt_min && change > controls.cfl_source
        {
            // the source timescale can no longer be resolved
            let outcome = finish(
                &mut trajectory,
                &state,
                OutcomeKind::NumericalFailure,
                format!(
                    "time step underflowed dt_min = {:.3e} with min(1+u) = {:.3e} still above \
                     the touchdown clearance",
                    controls.dt_min,
                    state.min_gap()
                ),
            );
            return Ok((trajectory, outcome));
        }

        // post-step adaptation toward the target gap change
        let observed = change.max(1e-12);
        dt = (dt_step * (controls.cfl_source / observed).clamp(0.5, 1.5))
            .clamp(controls.dt_min, controls.dt_max);
    }
}
