//! Fixed-step integrators and trajectories.
//!
//! Five schemes are provided:
//!
//! * `explicit_euler` — first order, not structure preserving. Its inertia
//!   grows on conservative systems, which makes it a useful negative control.
//! * `rk4` — classical fourth-order Runge–Kutta, the accuracy reference.
//! * `verlet` — velocity Verlet (kick-drift-kick) for the frictionless system.
//! * `damped_splitting` — Strang splitting `O B A B O` where `O` is the exact
//!   velocity damping over half a step and `B A B` is a Verlet step. With
//!   `γ = 0` the damping factor is exactly `1.0` and the scheme is
//!   bit-identical to `verlet`.
//! * `stochastic_splitting` — the same splitting with forcing. For white noise
//!   each `O` sub-step is the exact Ornstein–Uhlenbeck velocity update; for
//!   OU forcing the forcing value is advanced exactly between the two kicks
//!   and enters them as an ordinary force.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, check_dims, NoiseKind, State, SystemSpec};
use crate::error::{Error, Result};
use crate::landscape::LossLandscape;

/// Largest accepted `t_end / h`.
pub const MAX_STEPS: f64 = 1e8;

/// Below this damping the white-noise variance uses its `γ → 0` limit.
pub const GAMMA_ZERO_THRESHOLD: f64 = 1e-12;

/// Name of the random number generator used by the stochastic integrator.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9): seed_from_u64(seed), stream = ensemble member index";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExplicitEuler,
    Rk4,
    Verlet,
    DampedSplitting,
    StochasticSplitting,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ExplicitEuler,
        Method::Rk4,
        Method::Verlet,
        Method::DampedSplitting,
        Method::StochasticSplitting,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExplicitEuler => "explicit_euler",
            Method::Rk4 => "rk4",
            Method::Verlet => "verlet",
            Method::DampedSplitting => "damped_splitting",
            Method::StochasticSplitting => "stochastic_splitting",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::StochasticSplitting)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown integration method `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step size.
    pub h: f64,
    /// Horizon; the run takes `round(t_end / h)` steps.
    pub t_end: f64,
    /// Ignored by deterministic methods.
    pub seed: u64,
    /// Record every `record_every`-th step. The final step is always recorded.
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn new(method: Method, h: f64, t_end: f64) -> Self {
        IntegratorConfig {
            method,
            h,
            t_end,
            seed: 0,
            record_every: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_record_every(mut self, record_every: usize) -> Self {
        self.record_every = record_every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.h)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("horizon must be positive, got {}", self.t_end)));
        }
        if self.t_end / self.h > MAX_STEPS {
            return Err(Error::invalid(format!(
                "t_end / h = {:e} exceeds the limit of {MAX_STEPS:e} steps",
                self.t_end / self.h
            )));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps taken, at least one.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.h).round() as usize).max(1)
    }
}

/// Recorded samples of one run. Sample `k` has `states[k].t == times[k]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub inertia: Vec<f64>,
    /// `⟨η, v⟩` at each sample for runs with Ornstein–Uhlenbeck forcing.
    pub forcing_power: Option<Vec<f64>>,
    pub spec: SystemSpec,
    pub config: IntegratorConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// Coordinate `i` of the position at every sample.
    pub fn position(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.w[i]).collect()
    }

    pub fn velocity(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.v[i]).collect()
    }

    pub fn speed_squared(&self) -> Vec<f64> {
        self.states.iter().map(State::speed_squared).collect()
    }

    /// `max_k |I_k − I_0| / I_0`, or the absolute drift when `I_0 = 0`.
    pub fn max_relative_drift(&self) -> f64 {
        let i0 = self.inertia[0];
        let scale = if i0 == 0.0 { 1.0 } else { i0.abs() };
        self.inertia
            .iter()
            .map(|i| (i - i0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Finite-difference `dI/dt` at every sample: centered in the interior,
    /// one-sided at the two ends.
    pub fn inertia_rate(&self) -> Vec<f64> {
        finite_difference(&self.times, &self.inertia)
    }
}

/// Centered differences in the interior, one-sided at the ends.
pub fn finite_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (a, b) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect()
}

/// Source of the forcing term for [`step_stochastic`]: owns the random stream
/// and, for Ornstein–Uhlenbeck forcing, the current forcing value.
#[derive(Clone, Debug)]
pub struct NoiseProcess {
    kind: NoiseKind,
    sigma: f64,
    rng: ChaCha8Rng,
    forcing: DVector<f64>,
}

impl NoiseProcess {
    /// Independent stream `stream` of the generator seeded with `seed`.
    /// OU forcing starts from a draw of its stationary distribution.
    pub fn new(spec: &SystemSpec, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let dim = spec.dim();
        let mut process = NoiseProcess {
            kind: spec.noise(),
            sigma: spec.sigma(),
            rng,
            forcing: DVector::zeros(dim),
        };
        if let NoiseKind::OrnsteinUhlenbeck { .. } = process.kind {
            process.forcing = process.standard_normal(dim) * process.sigma;
        }
        process
    }

    /// Current forcing value `η` (zero for white noise, whose forcing has no
    /// pointwise value).
    pub fn forcing(&self) -> &DVector<f64> {
        &self.forcing
    }

    fn standard_normal(&mut self, dim: usize) -> DVector<f64> {
        DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut self.rng))
    }

    /// Exact update of `dv = −γ v dt + σ dW` over `dt`.
    fn damp_with_noise(&mut self, v: &mut DVector<f64>, gamma: f64, dt: f64) {
        let decay = (-gamma * dt).exp();
        let std = if gamma < GAMMA_ZERO_THRESHOLD {
            self.sigma * dt.sqrt()
        } else {
            self.sigma * (-(-2.0 * gamma * dt).exp_m1() / (2.0 * gamma)).sqrt()
        };
        let xi = self.standard_normal(v.len());
        *v *= decay;
        *v += xi * std;
    }

    /// Exact update of the OU forcing `dη = −η/τ dt + σ√(2/τ) dW` over `dt`.
    fn advance_forcing(&mut self, tau: f64, dt: f64) {
        let decay = (-dt / tau).exp();
        let std = self.sigma * (-(-2.0 * dt / tau).exp_m1()).sqrt();
        let xi = self.standard_normal(self.forcing.len());
        self.forcing *= decay;
        self.forcing += xi * std;
    }
}

fn require_deterministic(spec: &SystemSpec, method: &str) -> Result<()> {
    if spec.noise().is_stochastic() {
        return Err(Error::invalid(format!(
            "{method} cannot integrate noisy dynamics; use stochastic_splitting"
        )));
    }
    Ok(())
}

fn kick(v: &mut DVector<f64>, landscape: &dyn LossLandscape, w: &DVector<f64>, half: f64) {
    *v -= landscape.gradient(w) * half;
}

fn kick_forced(
    v: &mut DVector<f64>,
    landscape: &dyn LossLandscape,
    w: &DVector<f64>,
    forcing: &DVector<f64>,
    half: f64,
) {
    *v += (forcing - landscape.gradient(w)) * half;
}

/// One velocity-Verlet step of the frictionless system.
pub fn step_verlet(state: &State, spec: &SystemSpec, h: f64) -> Result<State> {
    require_deterministic(spec, "verlet")?;
    if spec.gamma() != 0.0 {
        return Err(Error::invalid(
            "verlet integrates the frictionless system only; use damped_splitting",
        ));
    }
    check_dims(state, spec.landscape())?;
    let landscape = spec.landscape();
    let half = 0.5 * h;
    let mut w = state.w.clone();
    let mut v = state.v.clone();
    kick(&mut v, landscape, &w, half);
    w += &v * h;
    kick(&mut v, landscape, &w, half);
    Ok(State { w, v, t: state.t + h })
}

/// One `O B A B O` step with exact velocity damping in the `O` sub-steps.
pub fn step_damped_splitting(state: &State, spec: &SystemSpec, h: f64) -> Result<State> {
    require_deterministic(spec, "damped_splitting")?;
    check_dims(state, spec.landscape())?;
    let landscape = spec.landscape();
    let half = 0.5 * h;
    let damp = (-spec.gamma() * half).exp();
    let mut w = state.w.clone();
    let mut v = &state.v * damp;
    kick(&mut v, landscape, &w, half);
    w += &v * h;
    kick(&mut v, landscape, &w, half);
    v *= damp;
    Ok(State { w, v, t: state.t + h })
}

/// One step of the forced dynamics.
pub fn step_stochastic(
    state: &State,
    spec: &SystemSpec,
    h: f64,
    noise: &mut NoiseProcess,
) -> Result<State> {
    check_dims(state, spec.landscape())?;
    let landscape = spec.landscape();
    let half = 0.5 * h;
    let gamma = spec.gamma();
    let mut w = state.w.clone();
    let mut v = state.v.clone();
    match spec.noise() {
        NoiseKind::None => {
            return Err(Error::invalid(
                "stochastic_splitting needs a noise kind; use damped_splitting",
            ))
        }
        NoiseKind::White => {
            noise.damp_with_noise(&mut v, gamma, half);
            kick(&mut v, landscape, &w, half);
            w += &v * h;
            kick(&mut v, landscape, &w, half);
            noise.damp_with_noise(&mut v, gamma, half);
        }
        NoiseKind::OrnsteinUhlenbeck { tau } => {
            let damp = (-gamma * half).exp();
            v *= damp;
            kick_forced(&mut v, landscape, &w, &noise.forcing, half);
            w += &v * h;
            noise.advance_forcing(tau, h);
            kick_forced(&mut v, landscape, &w, &noise.forcing, half);
            v *= damp;
        }
    }
    Ok(State { w, v, t: state.t + h })
}

/// One explicit Euler step.
pub fn step_explicit_euler(state: &State, spec: &SystemSpec, h: f64) -> Result<State> {
    require_deterministic(spec, "explicit_euler")?;
    let zero = DVector::zeros(state.dim());
    let a = dynamics::acceleration(state, spec, &zero)?;
    Ok(State {
        w: &state.w + &state.v * h,
        v: &state.v + a * h,
        t: state.t + h,
    })
}

/// One classical RK4 step on the first-order system `(ẇ, v̇) = (v, a(w, v))`.
pub fn step_rk4(state: &State, spec: &SystemSpec, h: f64) -> Result<State> {
    require_deterministic(spec, "rk4")?;
    let zero = DVector::zeros(state.dim());
    let accel = |w: &DVector<f64>, v: &DVector<f64>| -> Result<DVector<f64>> {
        let s = State {
            w: w.clone(),
            v: v.clone(),
            t: 0.0,
        };
        dynamics::acceleration(&s, spec, &zero)
    };
    let (w, v) = (&state.w, &state.v);

    let k1w = v.clone();
    let k1v = accel(w, v)?;
    let w2 = w + &k1w * (0.5 * h);
    let v2 = v + &k1v * (0.5 * h);
    let k2w = v2.clone();
    let k2v = accel(&w2, &v2)?;
    let w3 = w + &k2w * (0.5 * h);
    let v3 = v + &k2v * (0.5 * h);
    let k3w = v3.clone();
    let k3v = accel(&w3, &v3)?;
    let w4 = w + &k3w * h;
    let v4 = v + &k3v * h;
    let k4w = v4.clone();
    let k4v = accel(&w4, &v4)?;

    let sixth = h / 6.0;
    Ok(State {
        w: w + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * sixth,
        v: v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * sixth,
        t: state.t + h,
    })
}

fn check_method(spec: &SystemSpec, method: Method) -> Result<()> {
    match (method, spec.noise().is_stochastic()) {
        (Method::StochasticSplitting, false) => Err(Error::invalid(
            "stochastic_splitting needs a noise kind; use a deterministic method",
        )),
        (m, true) if !m.is_stochastic() => Err(Error::invalid(format!(
            "{m} cannot integrate noisy dynamics; use stochastic_splitting"
        ))),
        (Method::Verlet, _) if spec.gamma() != 0.0 => Err(Error::invalid(
            "verlet integrates the frictionless system only; use damped_splitting",
        )),
        _ => Ok(()),
    }
}

/// Integrate from `initial` (taken to be at `t = 0`) over `[0, t_end]`.
///
/// The run is reproducible bit-for-bit: deterministic methods always, the
/// stochastic method for a fixed `config.seed`.
pub fn integrate(spec: &SystemSpec, initial: &State, config: &IntegratorConfig) -> Result<Trajectory> {
    integrate_stream(spec, initial, config, 0)
}

/// As [`integrate`], drawing noise from stream `stream` of the seeded
/// generator. Ensembles use the member index as the stream.
pub fn integrate_stream(
    spec: &SystemSpec,
    initial: &State,
    config: &IntegratorConfig,
    stream: u64,
) -> Result<Trajectory> {
    config.validate()?;
    check_method(spec, config.method)?;
    check_dims(initial, spec.landscape())?;
    if !initial.is_finite() {
        return Err(Error::invalid("initial state has non-finite components"));
    }

    let landscape = spec.landscape();
    let n_steps = config.n_steps();
    let capacity = n_steps / config.record_every + 2;
    let h = config.h;
    let ou = matches!(spec.noise(), NoiseKind::OrnsteinUhlenbeck { .. });
    let mut noise = config
        .method
        .is_stochastic()
        .then(|| NoiseProcess::new(spec, config.seed, stream));

    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        inertia: Vec::with_capacity(capacity),
        forcing_power: ou.then(|| Vec::with_capacity(capacity)),
        spec: spec.clone(),
        config: *config,
    };

    let mut state = State {
        t: 0.0,
        ..initial.clone()
    };
    let record = |traj: &mut Trajectory, state: &State, noise: &Option<NoiseProcess>| -> Result<()> {
        traj.times.push(state.t);
        traj.inertia.push(dynamics::inertia(state, landscape)?);
        if let (Some(fp), Some(noise)) = (traj.forcing_power.as_mut(), noise.as_ref()) {
            fp.push(noise.forcing().dot(&state.v));
        }
        traj.states.push(state.clone());
        Ok(())
    };
    record(&mut traj, &state, &noise)?;

    for k in 1..=n_steps {
        state = match config.method {
            Method::ExplicitEuler => step_explicit_euler(&state, spec, h)?,
            Method::Rk4 => step_rk4(&state, spec, h)?,
            Method::Verlet => step_verlet(&state, spec, h)?,
            Method::DampedSplitting => step_damped_splitting(&state, spec, h)?,
            Method::StochasticSplitting => {
                let noise = noise.as_mut().expect("noise process exists for stochastic runs");
                step_stochastic(&state, spec, h, noise)?
            }
        };
        state.t = k as f64 * h;
        if !state.is_finite() {
            return Err(Error::NonFiniteState { step: k });
        }
        if k % config.record_every == 0 || k == n_steps {
            record(&mut traj, &state, &noise)?;
        }
    }
    Ok(traj)
}
