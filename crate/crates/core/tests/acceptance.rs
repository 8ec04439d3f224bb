//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use inertia::analysis::{self, ensemble_expected_decay, SweepConfig};
use inertia::discrete::{determinant_2x2, drift_profile, transition_matrix_1d};
use inertia::landscape::{self, check_gradient, LossLandscape};
use inertia::{
    closed_form_underdamped, integrate, IntegratorConfig, Method, NoiseKind, State, SystemSpec, Trajectory,
};

/// Oracle drift ratio of the discrete map for η = 0.01 vs 0.005 at horizon 10.
const DISCRETE_DRIFT_RATIO: f64 = 2.004985;
const DISCRETE_RATIO_BAND: (f64, f64) = (1.95, 2.06);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let pass = parts.iter().all(|o| o.pass);
    let detail = parts
        .iter()
        .map(|o| format!("{}{}", if o.pass { "" } else { "[fail] " }, o.detail))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass, detail }
}

fn iso(dim: usize) -> Arc<dyn LossLandscape> {
    Arc::new(landscape::quadratic_isotropic(dim).unwrap())
}

fn run(method: Method, gamma: f64, h: f64, t_end: f64, init: &State) -> Trajectory {
    let spec = SystemSpec::deterministic(iso(init.dim()), gamma).unwrap();
    integrate(&spec, init, &IntegratorConfig::new(method, h, t_end)).unwrap()
}

fn unit() -> State {
    State::scalar(1.0, 0.0).unwrap()
}

/// Max |centered dI/dt + γ‖v‖²| over interior samples.
fn dissipation_error(traj: &Trajectory, gamma: f64) -> f64 {
    let rate = traj.inertia_rate();
    let speed = traj.speed_squared();
    (1..rate.len() - 1)
        .map(|k| (rate[k] + gamma * speed[k]).abs())
        .fold(0.0, f64::max)
}

fn conservation() -> Outcome {
    let traj = run(Method::Verlet, 0.0, 0.01, 10.0, &unit());
    let drift = traj
        .inertia
        .iter()
        .map(|i| (i - 0.5).abs() / 0.5)
        .fold(0.0, f64::max);
    check(drift <= 1e-4, format!("max relative drift {drift:.3e} <= 1e-4"))
}

fn dissipation() -> Outcome {
    let coarse = dissipation_error(&run(Method::DampedSplitting, 0.4, 0.02, 10.0, &unit()), 0.4);
    let fine = dissipation_error(&run(Method::DampedSplitting, 0.4, 0.01, 10.0, &unit()), 0.4);
    let ratio = coarse / fine;
    check(
        ratio >= 3.5,
        format!("error {coarse:.3e} -> {fine:.3e}, reduction {ratio:.3} >= 3.5"),
    )
}

fn decay_fit() -> Outcome {
    let fit = analysis::decay_run(0.4, &SweepConfig::default()).unwrap();
    all(vec![
        check(
            (0.38..=0.42).contains(&fit.gamma_hat),
            format!("gamma_hat {:.5} in [0.38, 0.42]", fit.gamma_hat),
        ),
        check(
            fit.r_squared >= 0.999,
            format!("r^2 {:.6} >= 0.999", fit.r_squared),
        ),
    ])
}

fn sweep() -> Outcome {
    let entries = analysis::sweep_gamma(&[0.1, 0.2, 0.4, 0.8], &SweepConfig::default());
    let mut parts = Vec::new();
    for e in &entries {
        match &e.fit {
            Ok(fit) => {
                let rel = (fit.gamma_hat / e.gamma - 1.0).abs();
                parts.push(check(
                    rel <= 0.05,
                    format!("gamma {} -> {:.5} ({:.2}%)", e.gamma, fit.gamma_hat, 100.0 * rel),
                ));
            }
            Err(err) => parts.push(check(false, format!("gamma {}: {err}", e.gamma))),
        }
    }
    parts.push(check(analysis::sweep_is_monotone(&entries), "monotone"));
    let slope = analysis::sweep_slope(&entries).map_or(f64::NAN, |l| l.slope);
    parts.push(check(
        (0.95..=1.05).contains(&slope),
        format!("slope {slope:.4} in [0.95, 1.05]"),
    ));
    all(parts)
}

fn closed_form() -> Outcome {
    let traj = run(Method::DampedSplitting, 0.4, 0.01, 10.0, &unit());
    let exact = closed_form_underdamped(0.4, 1.0, 0.0).unwrap();
    let err = traj
        .states
        .iter()
        .map(|s| (s.w[0] - exact.eval(s.t).0).abs())
        .fold(0.0, f64::max);
    let residual = (0..=1000)
        .map(|k| {
            let t = 0.01 * k as f64;
            let (w, wd) = exact.eval(t);
            (exact.acceleration(t) + 0.4 * wd + w).abs()
        })
        .fold(0.0, f64::max);
    all(vec![
        check(err <= 1e-3, format!("max |w - w_exact| {err:.3e} <= 1e-3")),
        check(residual <= 1e-9, format!("ODE residual {residual:.3e} <= 1e-9")),
    ])
}

fn phase() -> Outcome {
    let orbit = run(Method::Verlet, 0.0, 0.01, 10.0, &unit());
    let band = orbit
        .states
        .iter()
        .map(|s| (s.w[0] * s.w[0] + s.v[0] * s.v[0] - 1.0).abs())
        .fold(0.0, f64::max);
    let spiral = run(Method::DampedSplitting, 0.4, 0.01, 10.0, &unit());
    let last = spiral.last();
    let radius = last.w[0].hypot(last.v[0]);
    all(vec![
        check(band <= 2e-4, format!("max |w^2+v^2-1| {band:.3e} <= 2e-4")),
        check(radius < 0.15, format!("terminal radius {radius:.5} < 0.15")),
    ])
}

fn landscape_2d() -> Outcome {
    let mut parts = Vec::new();
    for w in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
        let init = State::at_rest(DVector::from_row_slice(&w)).unwrap();
        let free = run(Method::Verlet, 0.0, 0.01, 10.0, &init);
        let drift = free.max_relative_drift();
        parts.push(check(drift <= 1e-4, format!("{w:?} drift {drift:.2e}")));
        let damped = run(Method::DampedSplitting, 0.4, 0.01, 10.0, &init);
        let rise = damped
            .inertia
            .windows(2)
            .map(|p| p[1] - p[0])
            .fold(f64::NEG_INFINITY, f64::max);
        parts.push(check(rise <= 0.0, format!("{w:?} damped max step change {rise:.2e} <= 0")));
    }
    all(parts)
}

fn discrete() -> Outcome {
    let one = DVector::from_element(1, 1.0);
    let zero = DVector::from_element(1, 0.0);
    let l = landscape::quadratic_isotropic(1).unwrap();
    let coarse = drift_profile(&one, &zero, 0.01, 1000, &l).unwrap();
    let fine = drift_profile(&one, &zero, 0.005, 2000, &l).unwrap();
    let ratio = coarse.relative_drift() / fine.relative_drift();
    let det = determinant_2x2(&transition_matrix_1d(0.01, &l).unwrap());
    let bounded = drift_profile(&one, &zero, 1.9, 1_000_000, &l)
        .map(|p| p.inertia.iter().all(|i| *i < 10.0))
        .unwrap_or(false);
    let diverges = match drift_profile(&one, &zero, 2.1, 1_000_000, &l) {
        Err(_) => true,
        Ok(p) => p.inertia.last().is_some_and(|i| *i > 1e6),
    };
    all(vec![
        check(
            coarse.relative_drift() <= 0.01,
            format!("relative drift {:.3e} <= 1%", coarse.relative_drift()),
        ),
        check(
            (DISCRETE_RATIO_BAND.0..=DISCRETE_RATIO_BAND.1).contains(&ratio),
            format!(
                "halving ratio {ratio:.5} in [{}, {}] (oracle {DISCRETE_DRIFT_RATIO})",
                DISCRETE_RATIO_BAND.0, DISCRETE_RATIO_BAND.1
            ),
        ),
        check(det == 1.0, format!("det {det:?} == 1")),
        check(bounded, "eta=1.9 bounded over 1e6 steps"),
        check(diverges, "eta=2.1 diverges"),
    ])
}

fn ensemble(noise: NoiseKind, sigma: f64, h: f64, members: usize) -> inertia::EnsembleStats {
    let spec = SystemSpec::new(iso(1), 0.4, sigma, noise).unwrap();
    let cfg = IntegratorConfig::new(Method::StochasticSplitting, h, 10.0).with_seed(0);
    ensemble_expected_decay(&spec, &unit(), &cfg, members).unwrap()
}

fn stochastic() -> Outcome {
    let degenerate_error = |h: f64| {
        let stats = ensemble(NoiseKind::White, 0.0, h, 100);
        let rate = &stats.inertia_rate.mean;
        let speed = &stats.speed_squared.mean;
        let zero_spread = stats.inertia.stderr.iter().all(|s| *s == 0.0);
        let err = (1..rate.len() - 1)
            .map(|k| (rate[k] + 0.4 * speed[k]).abs())
            .fold(0.0, f64::max);
        (err, zero_spread)
    };
    let (coarse, flat_a) = degenerate_error(0.02);
    let (fine, flat_b) = degenerate_error(0.01);
    let ratio = coarse / fine;

    let ou = ensemble(NoiseKind::OrnsteinUhlenbeck { tau: 0.5 }, 0.3, 0.01, 1000).balance();
    let white = ensemble(NoiseKind::White, 0.3, 0.01, 1000).balance();
    all(vec![
        check(
            flat_a && flat_b && ratio >= 3.5,
            format!("sigma=0: stderr 0, dI/dt error reduction {ratio:.3} >= 3.5"),
        ),
        check(
            ou.within(3.0),
            format!("OU residual {:.3e} = {:.2} SE", ou.residual, ou.z_score()),
        ),
        check(
            white.within(3.0),
            format!("white residual {:.3e} = {:.2} SE", white.residual, white.z_score()),
        ),
    ])
}

fn negative_control() -> Outcome {
    let traj = run(Method::ExplicitEuler, 0.0, 0.01, 10.0, &unit());
    let increasing = traj.inertia.windows(2).all(|p| p[1] > p[0]);
    check(
        increasing,
        format!(
            "explicit Euler inertia strictly increasing, 0.5 -> {:.5}",
            traj.inertia.last().unwrap()
        ),
    )
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for name in ["iso1d", "iso2d", "iso:5", "diag:1,4"] {
        let l = landscape::from_name(name).unwrap();
        for _ in 0..100 {
            let w = DVector::from_fn(l.dim(), |_, _| rng.random_range(-5.0..5.0));
            worst = worst.max(check_gradient(&l, &w, 1e-5).unwrap());
        }
    }
    check(worst <= 1e-6, format!("worst gradient discrepancy {worst:.3e} <= 1e-6"))
}

fn cli_outputs(dir: &Path, args: &[&str]) -> Result<Vec<(String, Vec<u8>)>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_inertia"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{args:?} exited {:?}", status.status.code()));
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    Ok(files)
}

fn reproducibility() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["conserve"],
        &["phase"],
        &["sweep"],
        &["traj2d"],
        &["discrete", "--eta-halving"],
        &["stochastic", "--members", "200", "--seed", "5"],
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut parts = Vec::new();
    for (k, args) in runs.iter().enumerate() {
        let a = tmp.path().join(format!("{k}a"));
        let b = tmp.path().join(format!("{k}b"));
        let same = match (cli_outputs(&a, args), cli_outputs(&b, args)) {
            (Ok(x), Ok(y)) => !x.is_empty() && x == y,
            _ => false,
        };
        parts.push(check(same, args[0]));
    }
    let svg = |name: &str| {
        let out = tmp.path().join(name);
        Command::new(env!("CARGO_BIN_EXE_inertia"))
            .arg("render")
            .arg("--input")
            .arg(tmp.path().join("1a/phase.csv"))
            .arg("--out")
            .arg(&out)
            .output()
            .ok()
            .filter(|o| o.status.success())
            .and_then(|_| std::fs::read(&out).ok())
    };
    let (x, y) = (svg("a.svg"), svg("b.svg"));
    parts.push(check(x.is_some() && x == y, "render"));
    all(parts)
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("conservation", conservation),
        ("dissipation identity", dissipation),
        ("exponential decay fit", decay_fit),
        ("decay sweep", sweep),
        ("closed-form cross-check", closed_form),
        ("phase portraits", phase),
        ("2D landscape", landscape_2d),
        ("discrete inertia", discrete),
        ("stochastic decay", stochastic),
        ("negative control", negative_control),
        ("gradient oracle", gradients),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name} ({secs:.2}s): {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            k + 1,
            outcome.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
