use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use serde_json::{json, Value};

use super::render;
use super::table::{push_trajectory, trajectory_columns, Table};
use super::{CommonArgs, Report};
use crate::analysis::{self, SweepConfig};
use crate::discrete::drift_profile;
use crate::dynamics::{NoiseKind, State, SystemSpec};
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig, Method, Trajectory};
use crate::landscape::{self, LossLandscape, QuadraticLandscape};

/// Tolerance on relative inertia drift for frictionless runs.
const CONSERVATION_TOL: f64 = 1e-4;
/// Slack allowed on monotone decay of damped runs.
const MONOTONE_SLACK: f64 = 1e-12;
/// Distance within which a frictionless 1D orbit counts as closed.
const ORBIT_CLOSURE_TOL: f64 = 1e-3;

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("`{x}` is not a number")))
        })
        .collect()
}

fn landscape(common: &CommonArgs, default: &str) -> Result<Arc<QuadraticLandscape>> {
    let name = common.landscape.as_deref().unwrap_or(default);
    Ok(Arc::new(landscape::from_name(name)?))
}

fn vector_flag(flag: &str, value: Option<&str>, dim: usize, fill: f64) -> Result<DVector<f64>> {
    match value {
        None => Ok(DVector::from_element(dim, fill)),
        Some(s) => {
            let v = parse_list(s)?;
            if v.len() != dim {
                return Err(Error::invalid(format!(
                    "--{flag} has {} components, landscape dimension is {dim}",
                    v.len()
                )));
            }
            Ok(DVector::from_vec(v))
        }
    }
}

fn initial_state(common: &CommonArgs, dim: usize) -> Result<State> {
    let w = vector_flag("w0", common.w0.as_deref(), dim, 1.0)?;
    let v = vector_flag("v0", common.v0.as_deref(), dim, 0.0)?;
    State::new(w, v)
}

fn prepare_out_dir(common: &CommonArgs) -> Result<()> {
    fs::create_dir_all(&common.out_dir)?;
    Ok(())
}

fn reject_noise(common: &CommonArgs, experiment: &str) -> Result<()> {
    let noisy = common.noise.is_some_and(|n| n.is_stochastic()) || common.sigma.is_some_and(|s| s != 0.0);
    if noisy {
        return Err(Error::invalid(format!(
            "{experiment} runs noise-free dynamics; use the stochastic subcommand"
        )));
    }
    Ok(())
}

fn default_method(gamma: f64) -> Method {
    if gamma == 0.0 {
        Method::Verlet
    } else {
        Method::DampedSplitting
    }
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn run_deterministic(
    common: &CommonArgs,
    landscape: &Arc<QuadraticLandscape>,
    gamma: f64,
    init: &State,
) -> Result<(Trajectory, Method)> {
    let method = common.method.unwrap_or_else(|| default_method(gamma));
    let spec = SystemSpec::deterministic(landscape.clone(), gamma)?;
    let cfg = IntegratorConfig::new(method, common.h, common.t_end)
        .with_seed(common.seed)
        .with_record_every(common.record_every);
    Ok((integrate(&spec, init, &cfg)?, method))
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|p| p[1] > p[0])
}

fn monotone_non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|p| p[1] <= p[0] + MONOTONE_SLACK)
}

pub(super) fn conserve(common: &CommonArgs, gamma0_only: bool) -> Result<Report> {
    reject_noise(common, "conserve")?;
    let landscape = landscape(common, "iso1d")?;
    let init = initial_state(common, landscape.dim())?;
    let mut gammas = vec![0.0];
    let damped = common.gamma.unwrap_or(0.4);
    if !gamma0_only && damped != 0.0 {
        gammas.push(damped);
    }
    prepare_out_dir(common)?;

    let mut table = Table::new(trajectory_columns("t", landscape.dim(), &["gamma"]));
    let mut report = Report::default();
    let mut cases = Vec::new();
    for &gamma in &gammas {
        let (traj, method) = run_deterministic(common, &landscape, gamma, &init)?;
        push_trajectory(&mut table, &traj, &[gamma]);
        let i0 = traj.inertia[0];
        let i_end = *traj.inertia.last().unwrap();
        let t_end = *traj.times.last().unwrap();
        let drift = traj.max_relative_drift();
        println!(
            "gamma={gamma} method={method} max_rel_drift={drift:.6e} I0={i0:.17e} I(T)={i_end:.17e} \
             I(T)/I0={:.6e} exp(-gamma*T)={:.6e}",
            i_end / i0,
            (-gamma * t_end).exp()
        );
        if method == Method::ExplicitEuler {
            eprintln!(
                "warning: explicit_euler is a negative control and does not conserve inertia \
                 (gamma={gamma}, drift {drift:.3e})"
            );
            if gamma == 0.0 {
                println!(
                    "gamma=0 explicit_euler inertia strictly increasing: {}",
                    strictly_increasing(&traj.inertia)
                );
            }
        }
        cases.push(json!({
            "gamma": gamma,
            "method": method,
            "max_relative_drift": drift,
            "final_inertia": i_end,
        }));
    }
    report.outputs.push(table.write(&common.out_dir, "conserve", common.format)?);
    report.parameters = json!({
        "landscape": landscape.name(),
        "gammas": gammas,
        "h": common.h,
        "t_end": common.t_end,
        "w0": vec_json(&init.w),
        "v0": vec_json(&init.v),
        "record_every": common.record_every,
        "format": common.format,
        "cases": cases,
    });
    Ok(report)
}

/// Smallest distance from `target` to the polyline through `points`.
fn polyline_distance(points: &[(f64, f64)], target: (f64, f64)) -> f64 {
    let seg = |a: (f64, f64), b: (f64, f64)| {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let s = if len2 == 0.0 {
            0.0
        } else {
            (((target.0 - a.0) * dx + (target.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
        };
        ((a.0 + s * dx - target.0).powi(2) + (a.1 + s * dy - target.1).powi(2)).sqrt()
    };
    match points {
        [] => f64::INFINITY,
        [p] => seg(*p, *p),
        _ => points
            .windows(2)
            .map(|p| seg(p[0], p[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Distance of the late part of a 1D orbit (`t ≥ T/2`) to its starting point,
/// measured against the segments joining consecutive samples.
pub(crate) fn orbit_closure_distance(traj: &Trajectory) -> f64 {
    let t_end = *traj.times.last().unwrap();
    let start = (traj.states[0].w[0], traj.states[0].v[0]);
    let late: Vec<(f64, f64)> = traj
        .states
        .iter()
        .filter(|s| s.t >= 0.5 * t_end)
        .map(|s| (s.w[0], s.v[0]))
        .collect();
    polyline_distance(&late, start)
}

pub(super) fn phase(common: &CommonArgs, gammas: &str) -> Result<Report> {
    reject_noise(common, "phase")?;
    let gammas = parse_list(gammas)?;
    if gammas.is_empty() {
        return Err(Error::invalid("--gammas must list at least one damping value"));
    }
    let landscape = landscape(common, "iso1d")?;
    if landscape.dim() != 1 {
        return Err(Error::invalid("phase portraits use a one-dimensional landscape"));
    }
    let init = initial_state(common, 1)?;
    prepare_out_dir(common)?;

    let mut table = Table::new(trajectory_columns("t", 1, &["gamma"]));
    let mut report = Report::default();
    let r0 = init.w[0] * init.w[0] + init.v[0] * init.v[0];
    for &gamma in &gammas {
        let (traj, method) = run_deterministic(common, &landscape, gamma, &init)?;
        push_trajectory(&mut table, &traj, &[gamma]);
        let last = traj.last();
        let radius = (last.w[0].powi(2) + last.v[0].powi(2)).sqrt();
        if gamma == 0.0 {
            let band = traj
                .states
                .iter()
                .map(|s| (s.w[0].powi(2) + s.v[0].powi(2) - r0).abs())
                .fold(0.0, f64::max);
            let closure = orbit_closure_distance(&traj);
            println!(
                "gamma=0 method={method} max|w^2+v^2-r0^2|={band:.6e} orbit_closure_distance={closure:.6e}"
            );
            // A unit-curvature orbit returns to its start once per 2π.
            let checkable = landscape.is_isotropic() && common.t_end >= 2.0 * PI && method != Method::ExplicitEuler;
            if checkable && closure > ORBIT_CLOSURE_TOL {
                report.violations.push(format!(
                    "gamma=0 orbit does not close: distance {closure:.3e} > {ORBIT_CLOSURE_TOL:e}"
                ));
            }
        } else {
            println!("gamma={gamma} method={method} terminal_radius={radius:.6e}");
        }
    }
    report.outputs.push(table.write(&common.out_dir, "phase", common.format)?);
    report.parameters = json!({
        "landscape": landscape.name(),
        "gammas": gammas,
        "h": common.h,
        "t_end": common.t_end,
        "w0": vec_json(&init.w),
        "v0": vec_json(&init.v),
        "method": common.method,
        "record_every": common.record_every,
        "format": common.format,
    });
    Ok(report)
}

pub(super) fn sweep(common: &CommonArgs, gammas: &str, periods: u32) -> Result<Report> {
    reject_noise(common, "sweep")?;
    let gammas = parse_list(gammas)?;
    if gammas.is_empty() {
        return Err(Error::invalid("--gammas must list at least one damping value"));
    }
    if periods == 0 {
        return Err(Error::invalid("--periods must be at least 1"));
    }
    if let Some(name) = common.landscape.as_deref() {
        if landscape::from_name(name)?.name() != "iso1d" {
            return Err(Error::invalid("the decay sweep runs on the iso1d landscape"));
        }
    }
    if common.method.is_some_and(|m| m != Method::DampedSplitting) {
        return Err(Error::invalid("the decay sweep uses damped_splitting"));
    }
    let init = initial_state(common, 1)?;
    let config = SweepConfig {
        h: common.h,
        periods,
        w0: init.w[0],
        v0: init.v[0],
    };
    prepare_out_dir(common)?;

    let entries = analysis::sweep_gamma(&gammas, &config);
    let mut table = Table::new(["gamma", "gamma_hat", "r_squared", "n_points"]);
    let mut report = Report::default();
    for e in &entries {
        match &e.fit {
            Ok(fit) => {
                println!(
                    "gamma={} gamma_hat={:.6e} rel_err={:.3e} r_squared={:.6} window=[0, {:.4}]",
                    e.gamma,
                    fit.gamma_hat,
                    if e.gamma != 0.0 { fit.gamma_hat / e.gamma - 1.0 } else { fit.gamma_hat },
                    fit.r_squared,
                    fit.window.1
                );
                table.push(vec![e.gamma, fit.gamma_hat, fit.r_squared, fit.n_points as f64]);
            }
            Err(err) => {
                eprintln!("gamma={}: {err}", e.gamma);
                table.push(vec![e.gamma, f64::NAN, f64::NAN, 0.0]);
            }
        }
    }
    let monotone = analysis::sweep_is_monotone(&entries);
    println!("monotone: {monotone}");
    let slope = analysis::sweep_slope(&entries);
    if let Some(line) = slope {
        println!("slope of gamma_hat vs gamma: {:.6} (intercept {:.3e})", line.slope, line.intercept);
    }
    if !monotone {
        report
            .violations
            .push("fitted decay rates are not monotone in gamma".into());
    }
    report.outputs.push(table.write(&common.out_dir, "sweep", common.format)?);
    report.notes.push(
        "gamma_hat is minus the slope of a least-squares line through ln I(t) over whole damped periods".into(),
    );
    report.parameters = json!({
        "landscape": "iso1d",
        "gammas": gammas,
        "periods": periods,
        "h": common.h,
        "w0": config.w0,
        "v0": config.v0,
        "method": Method::DampedSplitting,
        "format": common.format,
        "monotone": monotone,
        "slope": slope.map(|l| l.slope),
    });
    Ok(report)
}

fn parse_inits(s: &str, dim: usize) -> Result<Vec<DVector<f64>>> {
    let inits = s
        .split(';')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let v = parse_list(part)?;
            if v.len() != dim {
                return Err(Error::invalid(format!(
                    "initialization `{part}` has {} components, landscape dimension is {dim}",
                    v.len()
                )));
            }
            Ok(DVector::from_vec(v))
        })
        .collect::<Result<Vec<_>>>()?;
    if inits.is_empty() {
        return Err(Error::invalid("--inits must list at least one initialization"));
    }
    Ok(inits)
}

pub(super) fn traj2d(common: &CommonArgs, inits: &str) -> Result<Report> {
    reject_noise(common, "traj2d")?;
    let landscape = landscape(common, "iso2d")?;
    let dim = landscape.dim();
    let inits = parse_inits(inits, dim)?;
    let v0 = vector_flag("v0", common.v0.as_deref(), dim, 0.0)?;
    let gamma = common.gamma.unwrap_or(0.0);
    prepare_out_dir(common)?;

    let mut report = Report::default();
    for (k, w0) in inits.iter().enumerate() {
        let init = State::new(w0.clone(), v0.clone())?;
        let (traj, method) = run_deterministic(common, &landscape, gamma, &init)?;
        let mut table = Table::new(trajectory_columns("t", dim, &[]));
        push_trajectory(&mut table, &traj, &[]);
        report
            .outputs
            .push(table.write(&common.out_dir, &format!("traj2d_{k}"), common.format)?);

        let drift = traj.max_relative_drift();
        let monotone = monotone_non_increasing(&traj.inertia);
        println!(
            "init={k} w0={:?} I0={:.6e} I(T)={:.6e} max_rel_drift={drift:.3e} monotone_non_increasing={monotone}",
            w0.as_slice(),
            traj.inertia[0],
            traj.inertia.last().unwrap()
        );
        let control = method == Method::ExplicitEuler;
        if gamma == 0.0 && drift > CONSERVATION_TOL && !control {
            report.violations.push(format!(
                "init {k}: inertia drift {drift:.3e} exceeds {CONSERVATION_TOL:e}"
            ));
        }
        if gamma > 0.0 && !monotone && !control {
            report
                .violations
                .push(format!("init {k}: inertia increases under damping"));
        }
    }
    report.parameters = json!({
        "landscape": landscape.name(),
        "inits": inits.iter().map(vec_json).collect::<Vec<_>>(),
        "v0": vec_json(&v0),
        "gamma": gamma,
        "h": common.h,
        "t_end": common.t_end,
        "method": common.method.unwrap_or_else(|| default_method(gamma)),
        "record_every": common.record_every,
        "format": common.format,
    });
    Ok(report)
}

pub(super) fn discrete(common: &CommonArgs, eta: f64, steps: usize, eta_halving: bool) -> Result<Report> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid("--eta must be positive"));
    }
    if steps == 0 {
        return Err(Error::invalid("--steps must be at least 1"));
    }
    let landscape = landscape(common, "iso1d")?;
    let dim = landscape.dim();
    let init = initial_state(common, dim)?;
    prepare_out_dir(common)?;

    let write = |eta: f64, steps: usize, stem: &str| -> Result<(String, f64, f64)> {
        let profile = drift_profile(&init.w, &init.v, eta, steps, landscape.as_ref())?;
        let mut table = Table::new(trajectory_columns("step", dim, &[]));
        for (s, i) in profile.states.iter().zip(&profile.inertia) {
            let mut row = vec![s.step_index as f64];
            row.extend(s.w.iter());
            row.extend(s.v.iter());
            row.push(*i);
            table.push(row);
        }
        let name = table.write(&common.out_dir, stem, common.format)?;
        println!(
            "eta={eta} steps={steps} max_drift={:.6e} relative_drift={:.6e}",
            profile.max_drift,
            profile.relative_drift()
        );
        Ok((name, profile.max_drift, profile.relative_drift()))
    };

    let mut report = Report::default();
    let (name, _, rel) = write(eta, steps, "discrete")?;
    report.outputs.push(name);
    let mut ratio = None;
    if eta_halving {
        let (name, _, rel_half) = write(0.5 * eta, 2 * steps, "discrete_half")?;
        report.outputs.push(name);
        let r = rel / rel_half;
        println!("drift ratio (eta / eta/2): {r:.6}");
        ratio = Some(r);
    }
    report.parameters = json!({
        "landscape": landscape.name(),
        "eta": eta,
        "steps": steps,
        "eta_halving": eta_halving,
        "w0": vec_json(&init.w),
        "v0": vec_json(&init.v),
        "format": common.format,
        "relative_drift": rel,
        "drift_ratio": ratio,
    });
    Ok(report)
}

pub(super) fn stochastic(common: &CommonArgs, members: usize) -> Result<Report> {
    if common.method.is_some_and(|m| m != Method::StochasticSplitting) {
        return Err(Error::invalid("the stochastic experiment uses stochastic_splitting"));
    }
    let noise = common.noise.unwrap_or(NoiseKind::White);
    if !noise.is_stochastic() {
        return Err(Error::invalid("the stochastic experiment needs --noise white or ou:<tau>"));
    }
    let sigma = common.sigma.unwrap_or(0.3);
    let gamma = common.gamma.unwrap_or(0.4);
    let landscape = landscape(common, "iso1d")?;
    let init = initial_state(common, landscape.dim())?;
    let spec = SystemSpec::new(landscape.clone(), gamma, sigma, noise)?;
    let cfg = IntegratorConfig::new(Method::StochasticSplitting, common.h, common.t_end)
        .with_seed(common.seed)
        .with_record_every(common.record_every);
    prepare_out_dir(common)?;

    let stats = analysis::ensemble_expected_decay(&spec, &init, &cfg, members)?;
    let mut cols = vec!["t", "mean_I", "stderr_I", "mean_speed_sq", "mean_dIdt"];
    if stats.forcing_power.is_some() {
        cols.push("mean_forcing_power");
    }
    let mut table = Table::new(cols);
    for k in 0..stats.times.len() {
        let mut row = vec![
            stats.times[k],
            stats.inertia.mean[k],
            stats.inertia.stderr[k],
            stats.speed_squared.mean[k],
            stats.inertia_rate.mean[k],
        ];
        if let Some(fp) = &stats.forcing_power {
            row.push(fp.mean[k]);
        }
        table.push(row);
    }

    let mut report = Report::default();
    report.outputs.push(table.write(&common.out_dir, "stochastic", common.format)?);
    let balance = stats.balance();
    let term = match noise {
        NoiseKind::White => "n*sigma^2/2",
        _ => "E<eta,v>",
    };
    println!(
        "balance: mean_dIdt={:.6e} predicted={:.6e} ({term}={:.6e}) residual={:.6e} stderr={:.6e}",
        balance.mean_rate, balance.predicted_rate, balance.forcing_term, balance.residual, balance.stderr
    );
    if balance.stderr > 0.0 {
        println!("residual / stderr = {:.3}", balance.z_score());
    } else {
        // Degenerate noise: compare pointwise with the deterministic rate.
        let worst = (0..stats.times.len())
            .map(|k| (stats.inertia_rate.mean[k] + gamma * stats.speed_squared.mean[k]).abs())
            .fold(0.0, f64::max);
        println!("zero-variance ensemble: max |mean dI/dt + gamma*mean|v|^2| = {worst:.6e}");
    }
    report.parameters = json!({
        "landscape": landscape.name(),
        "gamma": gamma,
        "sigma": sigma,
        "noise": noise.to_string(),
        "members": members,
        "h": common.h,
        "t_end": common.t_end,
        "w0": vec_json(&init.w),
        "v0": vec_json(&init.v),
        "record_every": common.record_every,
        "format": common.format,
        "balance": {
            "mean_rate": balance.mean_rate,
            "predicted_rate": balance.predicted_rate,
            "forcing_term": balance.forcing_term,
            "residual": balance.residual,
            "stderr": balance.stderr,
        },
    });
    Ok(report)
}

pub(super) fn render(input: &Path, out: &Path, xy: Option<&str>, group: Option<&str>) -> Result<()> {
    let data = render::read_csv(input)?;
    let plot = render::select(&data, xy, group)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(out, render::to_svg(&plot))?;
    println!("wrote {} ({} series)", out.display(), plot.series.len());
    Ok(())
}
