use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use normotope::cli::RunConfig;
use normotope::Trajectory;
use tempfile::TempDir;

fn normotope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normotope"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_trajectory(path: &Path) -> Trajectory {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn reach_vanderpol_truncates_before_horizon() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("vdp");
    let res = normotope(&["reach", "--system", "vanderpol", "-o", path_arg(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let traj = read_trajectory(&out.join("trajectory.json"));
    assert!(traj.truncated);
    assert!(traj.t_end < 7.0 && traj.t_end > 1.0, "t_end {}", traj.t_end);

    let phi = fs::read_to_string(out.join("phi.csv")).unwrap();
    assert_eq!(phi.lines().next(), Some("t,phi"));
    assert_eq!(phi.lines().count(), traj.len() + 1);
}

#[test]
fn reach_ltv_rotation_keeps_offset() {
    let dir = TempDir::new().unwrap();
    let res = normotope(&["reach", "--system", "ltv-rotation", "-o", path_arg(dir.path())]);
    assert!(res.status.success());
    let traj = read_trajectory(&dir.path().join("trajectory.json"));
    assert!(!traj.truncated);
    assert!((traj.t_end - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    for s in &traj.states {
        assert_eq!(s.offset, 1.0);
    }
}

#[test]
fn usage_errors_exit_nonzero() {
    let res = normotope(&["reach"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("error:"));

    let res = normotope(&["ilqr", "--config", "/nonexistent/config.json"]);
    assert_eq!(res.status.code(), Some(2));

    let res = normotope(&["reach", "--system", "lorenz"]);
    assert_eq!(res.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"system": {"name": "vanderpol"}, "bogus": 1}"#).unwrap();
    let res = normotope(&["reach", "--config", path_arg(&bad)]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn one_iteration_equals_the_reach_baseline() {
    let dir = TempDir::new().unwrap();
    let reach = dir.path().join("reach");
    let ilqr = dir.path().join("ilqr");
    assert!(normotope(&["reach", "--system", "vanderpol", "-o", path_arg(&reach)]).status.success());
    let res = normotope(&["ilqr", "--system", "vanderpol", "--max-iters", "1", "--no-wall-time", "-o", path_arg(&ilqr)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let a = read_trajectory(&reach.join("trajectory.json"));
    let b = read_trajectory(&ilqr.join("best_trajectory.json"));
    assert_eq!(a.t_end, b.t_end);
    assert_eq!(a.phi, b.phi);
    assert_eq!(
        fs::read_to_string(reach.join("phi.csv")).unwrap(),
        fs::read_to_string(ilqr.join("phi.csv")).unwrap()
    );
}

#[test]
fn ilqr_outputs_are_byte_identical_without_wall_time() {
    let dir = TempDir::new().unwrap();
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let res = normotope(&["ilqr", "--system", "robot-arm", "--max-iters", "3", "--no-wall-time", "-o", path_arg(&out)]);
            assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
            out
        })
        .collect();
    for file in ["cost.csv", "phi.csv", "phi_iter_2.csv", "best_trajectory.json", "iterates.json"] {
        let a = fs::read(runs[0].join(file)).unwrap();
        let b = fs::read(runs[1].join(file)).unwrap();
        assert!(a == b, "{file} differs between identical runs");
    }
    let cost = fs::read_to_string(runs[0].join("cost.csv")).unwrap();
    assert_eq!(cost.lines().count(), 4);
}

#[test]
fn verify_passes_a_sound_tube_and_flags_a_shrunk_one() {
    let dir = TempDir::new().unwrap();
    let run = dir.path().join("arm");
    assert!(normotope(&["reach", "--system", "robot-arm", "-o", path_arg(&run)]).status.success());

    let res = normotope(&["verify", "--run-dir", path_arg(&run), "--samples", "200"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["containment"]["violations"], 0);

    let mut traj: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("trajectory.json")).unwrap()).unwrap();
    for y in traj["offsets"].as_array_mut().unwrap() {
        *y = serde_json::json!(y.as_f64().unwrap() * 0.5);
    }
    let shrunk = dir.path().join("shrunk.json");
    fs::write(&shrunk, serde_json::to_string(&traj).unwrap()).unwrap();
    let res = normotope(&[
        "verify",
        "--config",
        path_arg(&run.join("config.json")),
        "--trajectory",
        path_arg(&shrunk),
        "--samples",
        "200",
        "-o",
        path_arg(&dir.path().join("shrunk")),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(dir.path().join("shrunk/verify.json").exists());
}

#[test]
fn verify_ltv_reports_exactness_and_pmp() {
    let dir = TempDir::new().unwrap();
    assert!(normotope(&["reach", "--system", "ltv-rotation", "-o", path_arg(dir.path())]).status.success());
    let res = normotope(&["verify", "--run-dir", path_arg(dir.path()), "--samples", "50", "--tol", "1e-2", "--write-samples", "100"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["ltv_exactness"]["offset_deviation"], 0.0);
    assert!(report["pmp"]["identity_residual"].as_f64().unwrap() < 1e-6);
    let samples = fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(samples.lines().next(), Some("sample,t,x0,x1"));
}

#[test]
fn written_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r");
    let res = normotope(&["reach", "--system", "vanderpol", "--norm", "linf", "--tf", "3", "-o", path_arg(&out)]);
    assert!(res.status.success());
    let config = RunConfig::load(&out.join("config.json")).unwrap();
    assert_eq!(config.tf, 3.0);
    assert_eq!(config.system.name(), "vanderpol");
    assert_eq!(config, RunConfig::from_json(&serde_json::to_string(&config).unwrap()).unwrap());

    let again = dir.path().join("again");
    let res = normotope(&["reach", "--config", path_arg(&out.join("config.json")), "-o", path_arg(&again)]);
    assert!(res.status.success());
    assert_eq!(fs::read(out.join("phi.csv")).unwrap(), fs::read(again.join("phi.csv")).unwrap());
}
