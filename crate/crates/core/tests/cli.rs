use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use inertia::cli::manifest::{RunManifest, MANIFEST_FILE};

fn inertia(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inertia"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn conserve_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = inertia(&["conserve", "--T", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("conserve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,w0,v0,inertia,gamma"));
    // 101 samples per damping value.
    assert_eq!(lines.count(), 202);
    let manifest = RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.experiment, "conserve");
    assert_eq!(manifest.outputs, ["conserve.csv"]);
    assert_eq!(manifest.parameters["gammas"], serde_json::json!([0.0, 0.4]));
    assert_eq!(manifest.parameters["h"], 0.01);
    assert!(stdout(&out).contains("max_rel_drift"));
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = inertia(&["discrete", "--steps", "10", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("discrete.json")).unwrap()).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["step", "w0", "v0", "inertia"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
    assert_eq!(v["rows"][1][1], 0.9999);
}

#[test]
fn invalid_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["phase", "--gammas="][..],
        &["sweep", "--gammas", ""],
        &["conserve", "--method", "leapfrog"],
        &["conserve", "--landscape", "rosenbrock"],
        &["conserve", "--h", "-0.1"],
        &["traj2d", "--inits", "1,0;0"],
        &["conserve", "--w0", "1,2"],
        &["stochastic", "--members", "10"],
        &["stochastic", "--noise", "none"],
        &["conserve", "--sigma", "0.3", "--noise", "white"],
    ] {
        let out = inertia(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn render_rejects_empty_csv() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_inertia"))
        .args(["render", "--input"])
        .arg(&empty)
        .arg("--out")
        .arg(dir.path().join("x.svg"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn render_draws_phase_portrait() {
    let dir = tempfile::tempdir().unwrap();
    assert!(inertia(&["phase"], dir.path()).status.success());
    let svg = dir.path().join("phase.svg");
    let out = Command::new(env!("CARGO_BIN_EXE_inertia"))
        .args(["render", "--xy", "w:v", "--input"])
        .arg(dir.path().join("phase.csv"))
        .arg("--out")
        .arg(&svg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
}

#[test]
fn blow_up_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = inertia(
        &["conserve", "--method", "explicit_euler", "--h", "10", "--T", "100000", "--gamma0-only"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn explicit_euler_is_flagged_as_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let out = inertia(&["conserve", "--method", "explicit_euler", "--gamma0-only"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(stdout(&out).contains("strictly increasing: true"));
}

#[test]
fn failed_post_condition_exits_3() {
    // A coarse Verlet step breaks the 2D drift tolerance.
    let dir = tempfile::tempdir().unwrap();
    let out = inertia(&["traj2d", "--h", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join(MANIFEST_FILE).exists());
}

#[test]
fn sweep_reports_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = inertia(&["sweep"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("gamma,gamma_hat,r_squared,n_points"));
    assert_eq!(csv.lines().count(), 5);
    assert!(stdout(&out).contains("monotone: true"));
}

#[test]
fn manifest_command_line_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = inertia(&["stochastic", "--members", "100", "--T", "1", "--seed", "17", "--noise", "ou:0.5"], dir.path());
    assert!(out.status.success());
    let csv = dir.path().join("stochastic.csv");
    let first = fs::read(&csv).unwrap();
    let manifest = RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.seed, 17);
    assert_eq!(manifest.parameters["noise"], "ou:0.5");
    fs::remove_file(&csv).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_inertia"))
        .args(&manifest.command_line)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert_eq!(fs::read(&csv).unwrap(), first);
}

#[test]
fn seeds_change_stochastic_output() {
    let dir = tempfile::tempdir().unwrap();
    let read = |seed: &str, sub: &str| {
        let d = dir.path().join(sub);
        assert!(inertia(&["stochastic", "--members", "100", "--T", "1", "--seed", seed], &d).status.success());
        fs::read(d.join("stochastic.csv")).unwrap()
    };
    assert_ne!(read("1", "a"), read("2", "b"));
}
