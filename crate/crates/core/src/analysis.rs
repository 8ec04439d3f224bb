//! Closed-form underdamped solution, decay-rate fitting and ensemble
//! estimation of the expected inertia balance.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::{NoiseKind, State, SystemSpec};
use crate::error::{Error, Result};
use crate::integrate::{finite_difference, integrate, integrate_stream, IntegratorConfig, Method};
use crate::landscape::quadratic_isotropic;

/// Minimum number of samples accepted by the decay fit.
pub const MIN_FIT_POINTS: usize = 10;

/// Minimum ensemble size.
pub const MIN_MEMBERS: usize = 100;

/// `w(t) = e^{−γt/2} (A cos ωt + B sin ωt)` with `ω = √(1 − γ²/4)`, the
/// solution of `ẅ + γẇ + w = 0` for `0 ≤ γ < 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormSolution {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub omega: f64,
}

/// Solution through `(w0, v0)` at `t = 0`.
pub fn closed_form_underdamped(gamma: f64, w0: f64, v0: f64) -> Result<ClosedFormSolution> {
    if !(0.0..2.0).contains(&gamma) {
        return Err(Error::invalid(format!(
            "closed form covers the underdamped regime 0 <= gamma < 2, got {gamma}"
        )));
    }
    if !w0.is_finite() || !v0.is_finite() {
        return Err(Error::invalid("initial conditions must be finite"));
    }
    let omega = (1.0 - 0.25 * gamma * gamma).sqrt();
    Ok(ClosedFormSolution {
        gamma,
        a: w0,
        b: (v0 + 0.5 * gamma * w0) / omega,
        omega,
    })
}

impl ClosedFormSolution {
    /// Length of one damped oscillation, `2π/ω`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `(w(t), ẇ(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let (u, du) = self.carrier(t);
        let env = (-0.5 * self.gamma * t).exp();
        (env * u, env * (du - 0.5 * self.gamma * u))
    }

    /// `ẅ(t)`, differentiated analytically.
    pub fn acceleration(&self, t: f64) -> f64 {
        let (u, du) = self.carrier(t);
        let half = 0.5 * self.gamma;
        let env = (-half * t).exp();
        env * ((half * half - self.omega * self.omega) * u - 2.0 * half * du)
    }

    pub fn inertia(&self, t: f64) -> f64 {
        let (w, v) = self.eval(t);
        0.5 * (w * w + v * v)
    }

    // u = A cos ωt + B sin ωt and its derivative.
    fn carrier(&self, t: f64) -> (f64, f64) {
        let (s, c) = (self.omega * t).sin_cos();
        (
            self.a * c + self.b * s,
            self.omega * (self.b * c - self.a * s),
        )
    }
}

/// Damped period `2π/ω` of the unit quadratic at damping `gamma`.
pub fn damped_period(gamma: f64) -> Result<f64> {
    Ok(closed_form_underdamped(gamma, 1.0, 0.0)?.period())
}

/// Ordinary least-squares line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("regression inputs differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("regression needs at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::invalid("regression abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let constant = ys.iter().all(|&y| y == ys[0]);
    let r_squared = if constant || syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Fitted exponential decay rate of the inertia, `γ̂ = −d ln I / dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub gamma_hat: f64,
    /// Intercept of the `ln I` line.
    pub log_intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Least-squares fit of `ln I(t)` against `t` over the samples inside
/// `window`. Whole damped periods should be used for oscillatory data.
pub fn fit_log_linear(times: &[f64], inertia: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != inertia.len() {
        return Err(Error::invalid("times and inertia differ in length"));
    }
    if times.is_empty() {
        return Err(Error::invalid("no samples to fit"));
    }
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::invalid(format!("bad fit window [{t0}, {t1}]")));
    }
    let eps = 1e-9 * t1.abs().max(1.0);
    let (first, last) = (times[0], times[times.len() - 1]);
    if t0 < first - eps || t1 > last + eps {
        return Err(Error::invalid(format!(
            "fit window [{t0}, {t1}] exceeds the sampled range [{first}, {last}]"
        )));
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &i) in times.iter().zip(inertia) {
        if t < t0 - eps || t > t1 + eps {
            continue;
        }
        if i.is_nan() || i <= 0.0 {
            return Err(Error::invalid(format!(
                "inertia {i} at t = {t} is not positive; cannot take its logarithm"
            )));
        }
        xs.push(t);
        ys.push(i.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::invalid(format!(
            "fit window holds {} samples, need at least {MIN_FIT_POINTS}",
            xs.len()
        )));
    }
    let line = linear_regression(&xs, &ys)?;
    Ok(DecayFit {
        gamma_hat: -line.slope,
        log_intercept: line.intercept,
        r_squared: line.r_squared,
        window,
        n_points: xs.len(),
    })
}

pub fn fit_decay_rate(trajectory: &crate::integrate::Trajectory, window: (f64, f64)) -> Result<DecayFit> {
    fit_log_linear(&trajectory.times, &trajectory.inertia, window)
}

/// Damped runs on the unit quadratic used by [`sweep_gamma`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub h: f64,
    /// Whole damped periods covered by each run and its fit window.
    pub periods: u32,
    pub w0: f64,
    pub v0: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            h: 0.01,
            periods: 5,
            w0: 1.0,
            v0: 0.0,
        }
    }
}

#[derive(Debug)]
pub struct SweepEntry {
    pub gamma: f64,
    pub fit: Result<DecayFit>,
}

/// Run and fit one damped trajectory over `periods` whole damped periods.
pub fn decay_run(gamma: f64, config: &SweepConfig) -> Result<DecayFit> {
    if config.periods == 0 {
        return Err(Error::invalid("periods must be at least 1"));
    }
    let window_end = config.periods as f64 * damped_period(gamma)?;
    let landscape = Arc::new(quadratic_isotropic(1)?);
    let spec = SystemSpec::deterministic(landscape, gamma)?;
    // Cover the window with whole steps.
    let t_end = (window_end / config.h).ceil() * config.h;
    let cfg = IntegratorConfig::new(Method::DampedSplitting, config.h, t_end);
    let traj = integrate(&spec, &State::scalar(config.w0, config.v0)?, &cfg)?;
    fit_decay_rate(&traj, (0.0, window_end))
}

/// One damped run and decay fit per `γ`, sorted by `γ`. Failures are kept
/// per entry.
pub fn sweep_gamma(gammas: &[f64], config: &SweepConfig) -> Vec<SweepEntry> {
    let mut sorted = gammas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .map(|gamma| SweepEntry {
            gamma,
            fit: decay_run(gamma, config),
        })
        .collect()
}

/// Regression of `γ̂` on `γ` over the successful entries.
pub fn sweep_slope(entries: &[SweepEntry]) -> Option<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = entries
        .iter()
        .filter_map(|e| e.fit.as_ref().ok().map(|f| (e.gamma, f.gamma_hat)))
        .unzip();
    linear_regression(&xs, &ys).ok()
}

/// True when every successful `γ̂` is strictly larger than the previous one.
pub fn sweep_is_monotone(entries: &[SweepEntry]) -> bool {
    let rates: Vec<f64> = entries
        .iter()
        .filter_map(|e| e.fit.as_ref().ok().map(|f| f.gamma_hat))
        .collect();
    rates.windows(2).all(|p| p[1] > p[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Inertia,
    InertiaRate,
    SpeedSquared,
}

/// Per-time-index ensemble mean and standard error.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub n_members: usize,
    pub times: Vec<f64>,
    pub inertia: SeriesStats,
    pub inertia_rate: SeriesStats,
    pub speed_squared: SeriesStats,
    /// Mean `⟨η, v⟩`, present for Ornstein–Uhlenbeck forcing.
    pub forcing_power: Option<SeriesStats>,
    pub gamma: f64,
    pub sigma: f64,
    pub noise: NoiseKind,
    pub dim: usize,
    member_rate: Vec<f64>,
    member_speed: Vec<f64>,
    member_forcing: Option<Vec<f64>>,
}

/// Comparison of the time-averaged ensemble `E[dI/dt]` with its prediction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceCheck {
    /// Time average of the ensemble-mean `dI/dt`.
    pub mean_rate: f64,
    /// `−γ E‖v‖² + E⟨η, v⟩` (OU forcing) or `−γ E‖v‖² + n σ²/2` (white noise).
    pub predicted_rate: f64,
    /// The forcing contribution included in `predicted_rate`.
    pub forcing_term: f64,
    pub residual: f64,
    /// Standard error of `mean_rate` across members.
    pub stderr: f64,
}

impl BalanceCheck {
    pub fn z_score(&self) -> f64 {
        self.residual / self.stderr
    }

    pub fn within(&self, n_stderr: f64) -> bool {
        self.residual.abs() <= n_stderr * self.stderr
    }
}

impl EnsembleStats {
    pub fn series(&self, quantity: Quantity) -> &SeriesStats {
        match quantity {
            Quantity::Inertia => &self.inertia,
            Quantity::InertiaRate => &self.inertia_rate,
            Quantity::SpeedSquared => &self.speed_squared,
        }
    }

    /// Ensemble check of `E[dI/dt] = −γ E‖v‖² + forcing term`, averaged over
    /// the interior samples of the run.
    pub fn balance(&self) -> BalanceCheck {
        let n = self.n_members as f64;
        let mean_rate = self.member_rate.iter().sum::<f64>() / n;
        let mean_speed = self.member_speed.iter().sum::<f64>() / n;
        let forcing_term = match (&self.member_forcing, self.noise) {
            (Some(f), _) => f.iter().sum::<f64>() / n,
            (None, NoiseKind::White) => 0.5 * self.dim as f64 * self.sigma * self.sigma,
            _ => 0.0,
        };
        let predicted_rate = -self.gamma * mean_speed + forcing_term;
        // Both sides are ensemble estimates; their standard errors combine in
        // quadrature. The paired per-member residual is not used: under OU
        // forcing the balance holds path by path, so its spread only measures
        // discretization error.
        let (_, se_rate) = mean_and_stderr(self.member_rate.iter().copied(), self.n_members);
        let predicted = (0..self.n_members).map(|m| {
            let forcing = self.member_forcing.as_ref().map_or(forcing_term, |f| f[m]);
            forcing - self.gamma * self.member_speed[m]
        });
        let (_, se_predicted) = mean_and_stderr(predicted, self.n_members);
        let stderr = se_rate.hypot(se_predicted);
        BalanceCheck {
            mean_rate,
            predicted_rate,
            forcing_term,
            residual: mean_rate - predicted_rate,
            stderr,
        }
    }
}

struct MemberSeries {
    inertia: Vec<f64>,
    rate: Vec<f64>,
    speed: Vec<f64>,
    forcing: Option<Vec<f64>>,
}

fn interior_mean(xs: &[f64]) -> f64 {
    let inner = if xs.len() >= 3 { &xs[1..xs.len() - 1] } else { xs };
    inner.iter().sum::<f64>() / inner.len() as f64
}

fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mut first = xs.clone();
    if let Some(x0) = first.next() {
        // Identical members (zero noise) must report zero spread exactly.
        if first.all(|x| x == x0) {
            return (x0, 0.0);
        }
    }
    let mean = xs.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

fn aggregate(members: &[MemberSeries], pick: impl Fn(&MemberSeries) -> &[f64]) -> SeriesStats {
    let len = pick(&members[0]).len();
    let n = members.len();
    let (mean, stderr) = (0..len)
        .map(|k| mean_and_stderr(members.iter().map(|m| pick(m)[k]), n))
        .unzip();
    SeriesStats { mean, stderr }
}

/// Run `n_members` independent stochastic trajectories in parallel and
/// collect per-time-index statistics of `I`, `dI/dt` and `‖v‖²`.
///
/// Member `k` draws its noise from stream `k` of the generator seeded with
/// `config.seed`, so the result does not depend on scheduling.
pub fn ensemble_expected_decay(
    spec: &SystemSpec,
    initial: &State,
    config: &IntegratorConfig,
    n_members: usize,
) -> Result<EnsembleStats> {
    ensemble_expected_decay_with(spec, initial, config, n_members, Execution::Parallel)
}

pub fn ensemble_expected_decay_with(
    spec: &SystemSpec,
    initial: &State,
    config: &IntegratorConfig,
    n_members: usize,
    execution: Execution,
) -> Result<EnsembleStats> {
    if n_members < MIN_MEMBERS {
        return Err(Error::invalid(format!(
            "ensemble needs at least {MIN_MEMBERS} members, got {n_members}"
        )));
    }
    if !spec.noise().is_stochastic() {
        return Err(Error::invalid("ensemble estimation needs a stochastic system"));
    }
    if config.method != Method::StochasticSplitting {
        return Err(Error::invalid("ensemble runs use stochastic_splitting"));
    }

    let run_member = |member: usize| -> Result<MemberSeries> {
        let traj = integrate_stream(spec, initial, config, member as u64).map_err(|e| Error::Member {
            member,
            source: Box::new(e),
        })?;
        Ok(MemberSeries {
            rate: finite_difference(&traj.times, &traj.inertia),
            speed: traj.speed_squared(),
            forcing: traj.forcing_power,
            inertia: traj.inertia,
        })
    };
    let results: Vec<Result<MemberSeries>> = match execution {
        Execution::Sequential => (0..n_members).map(run_member).collect(),
        Execution::Parallel => (0..n_members).into_par_iter().map(run_member).collect(),
    };
    let members = results.into_iter().collect::<Result<Vec<_>>>()?;

    let times = {
        // Every member shares the deterministic time grid.
        let traj_len = members[0].inertia.len();
        let n_steps = config.n_steps();
        let mut ts: Vec<f64> = (0..=n_steps)
            .filter(|k| k % config.record_every == 0 || *k == n_steps)
            .map(|k| k as f64 * config.h)
            .collect();
        ts.truncate(traj_len);
        ts
    };

    let has_forcing = members[0].forcing.is_some();
    Ok(EnsembleStats {
        n_members,
        inertia: aggregate(&members, |m| &m.inertia),
        inertia_rate: aggregate(&members, |m| &m.rate),
        speed_squared: aggregate(&members, |m| &m.speed),
        forcing_power: has_forcing
            .then(|| aggregate(&members, |m| m.forcing.as_deref().unwrap_or(&[]))),
        member_rate: members.iter().map(|m| interior_mean(&m.rate)).collect(),
        member_speed: members.iter().map(|m| interior_mean(&m.speed)).collect(),
        member_forcing: has_forcing.then(|| {
            members
                .iter()
                .map(|m| interior_mean(m.forcing.as_deref().unwrap_or(&[])))
                .collect()
        }),
        times,
        gamma: spec.gamma(),
        sigma: spec.sigma(),
        noise: spec.noise(),
        dim: spec.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::quadratic_isotropic;

    #[test]
    fn closed_form_undamped() {
        let cf = closed_form_underdamped(0.0, 1.0, 0.0).unwrap();
        let (w, v) = cf.eval(PI);
        assert!((w + 1.0).abs() < 1e-15);
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn closed_form_coefficients() {
        let cf = closed_form_underdamped(0.4, 1.0, 0.0).unwrap();
        assert!((cf.omega - 0.96f64.sqrt()).abs() < 1e-15);
        assert!((cf.omega - 0.979796).abs() < 1e-6);
        assert_eq!(cf.a, 1.0);
        assert!((cf.b - 0.204124).abs() < 1e-6);
        assert!((cf.omega * cf.omega + 0.04 - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn closed_form_reproduces_initial_conditions() {
        for &(g, w0, v0) in &[(0.0, 1.0, 0.0), (0.4, -0.3, 2.0), (1.9, 0.5, -0.5)] {
            let (w, v) = closed_form_underdamped(g, w0, v0).unwrap().eval(0.0);
            assert!((w - w0).abs() < 1e-15);
            assert!((v - v0).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_rejects_overdamped() {
        assert!(matches!(closed_form_underdamped(2.0, 1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(closed_form_underdamped(-0.1, 1.0, 0.0).is_err());
        assert!(closed_form_underdamped(f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.01).collect();
        let inertia: Vec<f64> = times.iter().map(|t| 0.5 * (-0.4 * t).exp()).collect();
        let fit = fit_log_linear(&times, &inertia, (0.0, 10.0)).unwrap();
        assert!((fit.gamma_hat - 0.4).abs() < 1e-10);
        assert_eq!(fit.r_squared, 1.0);
        assert_eq!(fit.n_points, 1001);
        assert!((fit.log_intercept - 0.5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let times: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let mut inertia = vec![1.0; 20];
        assert!(fit_log_linear(&times, &inertia, (0.0, 5.0)).is_err()); // 6 points
        assert!(fit_log_linear(&times, &inertia, (0.0, 25.0)).is_err()); // outside range
        assert!(fit_log_linear(&times, &inertia, (5.0, 5.0)).is_err());
        inertia[3] = 0.0;
        assert!(matches!(
            fit_log_linear(&times, &inertia, (0.0, 19.0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(fit_log_linear(&times, &inertia, (4.0, 19.0)).is_ok());
    }

    #[test]
    fn fit_of_constant_has_zero_rate() {
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let fit = fit_log_linear(&times, &vec![0.5; 50], (0.0, 4.9)).unwrap();
        assert!(fit.gamma_hat.abs() < 1e-15);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn regression_basics() {
        let fit = linear_regression(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-15);
        assert!((fit.intercept - 1.0).abs() < 1e-15);
        assert!(linear_regression(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(linear_regression(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn sweep_keeps_failures_and_sorts() {
        let entries = sweep_gamma(&[0.4, 2.5, 0.1], &SweepConfig::default());
        let gammas: Vec<f64> = entries.iter().map(|e| e.gamma).collect();
        assert_eq!(gammas, vec![0.1, 0.4, 2.5]);
        assert!(entries[0].fit.is_ok());
        assert!(entries[1].fit.is_ok());
        assert!(matches!(entries[2].fit, Err(Error::InvalidArgument(_))));
        assert!(sweep_is_monotone(&entries));
    }

    #[test]
    fn sweep_at_zero_damping() {
        let entries = sweep_gamma(&[0.0], &SweepConfig::default());
        let fit = entries[0].fit.as_ref().unwrap();
        assert!(fit.gamma_hat.abs() <= 1e-4, "rate {}", fit.gamma_hat);
        assert!(sweep_slope(&entries).is_none());
    }

    #[test]
    fn ensemble_preconditions() {
        let l = Arc::new(quadratic_isotropic(1).unwrap());
        let init = State::scalar(1.0, 0.0).unwrap();
        let cfg = IntegratorConfig::new(Method::StochasticSplitting, 0.01, 1.0);
        let noisy = SystemSpec::new(l.clone(), 0.4, 0.3, NoiseKind::White).unwrap();
        assert!(ensemble_expected_decay(&noisy, &init, &cfg, 99).is_err());
        let clean = SystemSpec::deterministic(l, 0.4).unwrap();
        assert!(ensemble_expected_decay(&clean, &init, &cfg, 100).is_err());
        let wrong = IntegratorConfig::new(Method::DampedSplitting, 0.01, 1.0);
        assert!(ensemble_expected_decay(&noisy, &init, &wrong, 100).is_err());
    }

    #[test]
    fn ensemble_member_failure_names_member() {
        let l = Arc::new(crate::landscape::quadratic_diagonal(&[1e8]).unwrap());
        let spec = SystemSpec::new(l, 0.0, 0.3, NoiseKind::White).unwrap();
        let cfg = IntegratorConfig::new(Method::StochasticSplitting, 0.1, 100.0);
        let err = ensemble_expected_decay(&spec, &State::scalar(1.0, 0.0).unwrap(), &cfg, 100).unwrap_err();
        assert!(matches!(err, Error::Member { member: 0, .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn ensemble_series_lengths() {
        let l = Arc::new(quadratic_isotropic(1).unwrap());
        let spec = SystemSpec::new(l, 0.4, 0.3, NoiseKind::White).unwrap();
        let cfg = IntegratorConfig::new(Method::StochasticSplitting, 0.01, 1.0).with_record_every(3);
        let stats = ensemble_expected_decay(&spec, &State::scalar(1.0, 0.0).unwrap(), &cfg, 100).unwrap();
        let n = stats.times.len();
        assert_eq!(n, 35);
        for q in [Quantity::Inertia, Quantity::InertiaRate, Quantity::SpeedSquared] {
            assert_eq!(stats.series(q).mean.len(), n);
            assert_eq!(stats.series(q).stderr.len(), n);
        }
        assert!(stats.forcing_power.is_none());
        assert_eq!(stats.inertia.stderr[0], 0.0);
        assert!(stats.inertia.stderr[n - 1] > 0.0);
    }
}
