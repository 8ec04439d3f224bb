//! The damped, optionally forced second-order system
//!
//! ```text
//! ẅ + γ ẇ + ∇L(w) = η(t)
//! ```
//!
//! and the computational inertia `I = ½‖ẇ‖² + L(w)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::LossLandscape;

/// Phase-space point `(w, v = dw/dt)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub w: DVector<f64>,
    pub v: DVector<f64>,
    pub t: f64,
}

impl State {
    /// State at `t = 0`. Rejects mismatched dimensions and non-finite input.
    pub fn new(w: DVector<f64>, v: DVector<f64>) -> Result<Self> {
        if w.len() != v.len() {
            return Err(Error::invalid(format!(
                "position has dimension {} but velocity has {}",
                w.len(),
                v.len()
            )));
        }
        let state = State { w, v, t: 0.0 };
        if !state.is_finite() {
            return Err(Error::invalid("state has non-finite components"));
        }
        Ok(state)
    }

    /// Convenience constructor for one-dimensional systems.
    pub fn scalar(w: f64, v: f64) -> Result<Self> {
        State::new(DVector::from_element(1, w), DVector::from_element(1, v))
    }

    /// Rest state at `w`.
    pub fn at_rest(w: DVector<f64>) -> Result<Self> {
        let v = DVector::zeros(w.len());
        State::new(w, v)
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.w.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }

    pub fn speed_squared(&self) -> f64 {
        self.v.norm_squared()
    }
}

/// Forcing process entering the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NoiseKind {
    None,
    /// Gaussian white noise: the velocity receives independent increments of
    /// standard deviation `σ√h` per step of length `h`.
    White,
    /// Stationary Ornstein–Uhlenbeck forcing with correlation time `tau` and
    /// stationary standard deviation `σ` per coordinate.
    OrnsteinUhlenbeck { tau: f64 },
}

impl NoiseKind {
    pub fn is_stochastic(&self) -> bool {
        !matches!(self, NoiseKind::None)
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::None => write!(f, "none"),
            NoiseKind::White => write!(f, "white"),
            NoiseKind::OrnsteinUhlenbeck { tau } => write!(f, "ou:{tau}"),
        }
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(NoiseKind::None),
            "white" => Ok(NoiseKind::White),
            other => {
                let tau = other
                    .strip_prefix("ou:")
                    .and_then(|t| t.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid(format!("unknown noise kind `{other}`")))?;
                if !(tau > 0.0 && tau.is_finite()) {
                    return Err(Error::invalid("OU correlation time must be positive"));
                }
                Ok(NoiseKind::OrnsteinUhlenbeck { tau })
            }
        }
    }
}

/// Landscape plus damping and forcing parameters.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    landscape: Arc<dyn LossLandscape>,
    gamma: f64,
    sigma: f64,
    noise: NoiseKind,
}

impl SystemSpec {
    /// `sigma > 0` requires a stochastic `noise`; `sigma = 0` with a
    /// stochastic kind is accepted as a degenerate, noise-free process.
    pub fn new(
        landscape: Arc<dyn LossLandscape>,
        gamma: f64,
        sigma: f64,
        noise: NoiseKind,
    ) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("damping must be finite and >= 0, got {gamma}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("noise amplitude must be finite and >= 0, got {sigma}")));
        }
        if sigma > 0.0 && !noise.is_stochastic() {
            return Err(Error::invalid("positive noise amplitude needs a noise kind"));
        }
        if let NoiseKind::OrnsteinUhlenbeck { tau } = noise {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::invalid("OU correlation time must be positive"));
            }
        }
        Ok(SystemSpec {
            landscape,
            gamma,
            sigma,
            noise,
        })
    }

    pub fn deterministic(landscape: Arc<dyn LossLandscape>, gamma: f64) -> Result<Self> {
        SystemSpec::new(landscape, gamma, 0.0, NoiseKind::None)
    }

    pub fn landscape(&self) -> &dyn LossLandscape {
        self.landscape.as_ref()
    }

    pub fn landscape_arc(&self) -> Arc<dyn LossLandscape> {
        Arc::clone(&self.landscape)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn noise(&self) -> NoiseKind {
        self.noise
    }

    pub fn dim(&self) -> usize {
        self.landscape.dim()
    }
}

pub(crate) fn check_dims(state: &State, landscape: &dyn LossLandscape) -> Result<()> {
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

/// Computational inertia `½‖v‖² + L(w)`.
pub fn inertia(state: &State, landscape: &dyn LossLandscape) -> Result<f64> {
    check_dims(state, landscape)?;
    Ok(0.5 * state.v.norm_squared() + landscape.value(&state.w))
}

/// `−γ v − ∇L(w) + noise_value`. Pass a zero vector for deterministic dynamics.
pub fn acceleration(state: &State, spec: &SystemSpec, noise_value: &DVector<f64>) -> Result<DVector<f64>> {
    check_dims(state, spec.landscape())?;
    if noise_value.len() != state.dim() {
        return Err(Error::invalid(format!(
            "noise has dimension {}, state has {}",
            noise_value.len(),
            state.dim()
        )));
    }
    Ok(-spec.landscape().gradient(&state.w) - &state.v * spec.gamma() + noise_value)
}

/// Exact rate of change of the inertia along deterministic trajectories,
/// `dI/dt = −γ‖v‖²`.
pub fn inertia_rate_theoretical(state: &State, spec: &SystemSpec) -> Result<f64> {
    if spec.noise().is_stochastic() {
        return Err(Error::invalid(
            "the pointwise dissipation rate only holds for noise-free dynamics",
        ));
    }
    check_dims(state, spec.landscape())?;
    Ok(-spec.gamma() * state.v.norm_squared())
}
