//! Continuous-time second-order optimization dynamics and the computational
//! inertia `I = ½‖ẇ‖² + L(w)`.
//!
//! The crate integrates `ẅ + γẇ + ∇L(w) = η(t)` with fixed-step schemes,
//! tracks the inertia along trajectories, and provides the analysis tools
//! used to check its conservation (γ = 0), dissipation (`dI/dt = −γ‖ẇ‖²`)
//! and expected decay under stochastic forcing.
//!
//! ```
//! use std::sync::Arc;
//! use inertia::{integrate, quadratic_isotropic, IntegratorConfig, Method, State, SystemSpec};
//!
//! let spec = SystemSpec::deterministic(Arc::new(quadratic_isotropic(1)?), 0.0)?;
//! let cfg = IntegratorConfig::new(Method::Verlet, 0.01, 10.0);
//! let traj = integrate(&spec, &State::scalar(1.0, 0.0)?, &cfg)?;
//! assert!(traj.max_relative_drift() < 1e-4);
//! # Ok::<(), inertia::Error>(())
//! ```

pub mod analysis;
pub mod cli;
pub mod discrete;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod landscape;

pub use analysis::{
    closed_form_underdamped, ensemble_expected_decay, fit_decay_rate, sweep_gamma, BalanceCheck,
    ClosedFormSolution, DecayFit, EnsembleStats, SweepConfig, SweepEntry,
};
pub use discrete::{discrete_inertia, drift_profile, momentum_step, DiscreteState, DriftProfile};
pub use dynamics::{acceleration, inertia, inertia_rate_theoretical, NoiseKind, State, SystemSpec};
pub use error::{Error, Result};
pub use integrate::{
    integrate, step_damped_splitting, step_stochastic, step_verlet, IntegratorConfig, Method,
    NoiseProcess, Trajectory,
};
pub use landscape::{check_gradient, quadratic_general, quadratic_isotropic, LossLandscape, QuadraticLandscape};
