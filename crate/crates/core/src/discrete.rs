//! Discrete-time momentum map
//!
//! ```text
//! v_{t+1} = v_t − η ∇L(w_t)
//! w_{t+1} = w_t + η v_{t+1}
//! ```
//!
//! and its inertia `I_t = ½‖v_t‖² + L(w_t)`. The step size `η` multiplies both
//! updates, so it plays the role of a time step and the map is the
//! symplectic-Euler discretization of the frictionless dynamics.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::landscape::LossLandscape;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteState {
    pub w: DVector<f64>,
    pub v: DVector<f64>,
    pub step_index: u64,
}

impl DiscreteState {
    pub fn new(w: DVector<f64>, v: DVector<f64>) -> Result<Self> {
        if w.len() != v.len() {
            return Err(Error::invalid(format!(
                "position has dimension {} but velocity has {}",
                w.len(),
                v.len()
            )));
        }
        if w.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("state has non-finite components"));
        }
        Ok(DiscreteState { w, v, step_index: 0 })
    }

    pub fn scalar(w: f64, v: f64) -> Result<Self> {
        DiscreteState::new(DVector::from_element(1, w), DVector::from_element(1, v))
    }

    fn is_finite(&self) -> bool {
        self.w.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }
}

fn check_dims(state: &DiscreteState, landscape: &dyn LossLandscape) -> Result<()> {
    if state.w.len() != landscape.dim() || state.v.len() != landscape.dim() {
        return Err(Error::invalid(format!(
            "state has dimension ({}, {}), landscape has {}",
            state.w.len(),
            state.v.len(),
            landscape.dim()
        )));
    }
    Ok(())
}

/// Velocity update first, then the position update with the new velocity.
pub fn momentum_step(
    state: &DiscreteState,
    eta_step: f64,
    landscape: &dyn LossLandscape,
) -> Result<DiscreteState> {
    if !(eta_step > 0.0 && eta_step.is_finite()) {
        return Err(Error::invalid(format!("step size must be positive, got {eta_step}")));
    }
    check_dims(state, landscape)?;
    let v = &state.v - landscape.gradient(&state.w) * eta_step;
    let w = &state.w + &v * eta_step;
    Ok(DiscreteState {
        w,
        v,
        step_index: state.step_index + 1,
    })
}

pub fn discrete_inertia(state: &DiscreteState, landscape: &dyn LossLandscape) -> Result<f64> {
    check_dims(state, landscape)?;
    Ok(0.5 * state.v.norm_squared() + landscape.value(&state.w))
}

#[derive(Clone, Debug)]
pub struct DriftProfile {
    /// `I_t` for `t = 0..=n_steps`.
    pub inertia: Vec<f64>,
    /// `max_t |I_t − I_0|`.
    pub max_drift: f64,
    pub states: Vec<DiscreteState>,
}

impl DriftProfile {
    /// `max_drift / I_0`, or `max_drift` when `I_0 = 0`.
    pub fn relative_drift(&self) -> f64 {
        let i0 = self.inertia[0];
        if i0 == 0.0 {
            self.max_drift
        } else {
            self.max_drift / i0.abs()
        }
    }
}

/// Iterate the map `n_steps` times from `(w0, v0)` and record `I_t`.
pub fn drift_profile(
    w0: &DVector<f64>,
    v0: &DVector<f64>,
    eta_step: f64,
    n_steps: usize,
    landscape: &dyn LossLandscape,
) -> Result<DriftProfile> {
    if n_steps == 0 {
        return Err(Error::invalid("n_steps must be at least 1"));
    }
    let mut state = DiscreteState::new(w0.clone(), v0.clone())?;
    let i0 = discrete_inertia(&state, landscape)?;
    let mut inertia = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    inertia.push(i0);
    states.push(state.clone());
    let mut max_drift: f64 = 0.0;
    for _ in 0..n_steps {
        state = momentum_step(&state, eta_step, landscape)?;
        let i = discrete_inertia(&state, landscape)?;
        if !state.is_finite() || !i.is_finite() {
            return Err(Error::NonFiniteState {
                step: state.step_index as usize,
            });
        }
        max_drift = max_drift.max((i - i0).abs());
        inertia.push(i);
        states.push(state.clone());
    }
    Ok(DriftProfile {
        inertia,
        max_drift,
        states,
    })
}

/// One-step transition matrix of the map on a one-dimensional landscape,
/// acting on `(w, v)`, obtained by stepping the two basis vectors.
pub fn transition_matrix_1d(eta_step: f64, landscape: &dyn LossLandscape) -> Result<[[f64; 2]; 2]> {
    if landscape.dim() != 1 {
        return Err(Error::invalid("transition matrix probe needs a one-dimensional landscape"));
    }
    let e_w = momentum_step(&DiscreteState::scalar(1.0, 0.0)?, eta_step, landscape)?;
    let e_v = momentum_step(&DiscreteState::scalar(0.0, 1.0)?, eta_step, landscape)?;
    Ok([[e_w.w[0], e_v.w[0]], [e_w.v[0], e_v.v[0]]])
}

pub fn determinant_2x2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}
