//! Monte Carlo containment of computed tubes against Euler sample paths.

use nalgebra::{DMatrix, DVector};
use normotope::cli::RunConfig;
use normotope::dynamics::Ltv;
use normotope::reach_ilqr::run;
use normotope::verify::mc_containment;
use normotope::{Embedding, EmbeddingState, HypercontrolSchedule, IntervalVector, NormKind, Normotope, Policy};

const TOL: f64 = 1e-6;

fn baseline_report(name: &str, kind: NormKind, samples: usize) -> normotope::verify::ContainmentReport {
    let mut config = RunConfig::preset(name).unwrap();
    config.norm = kind;
    let sys = config.system.build().unwrap();
    let n0 = config.initial_normotope().unwrap();
    let emb = Embedding::new(&sys, kind);
    let schedule = HypercontrolSchedule::zeros(config.grid().unwrap(), n0.center.len());
    let traj = emb
        .simulate(&EmbeddingState::from_normotope(&n0), &schedule, Policy::Adjoint, config.ilqr.phi_max)
        .unwrap();
    assert!(traj.len() > 10);
    mc_containment(&sys, &n0, &traj, &IntervalVector::empty(), samples, 3, TOL).unwrap()
}

#[test]
fn robot_arm_baseline_tube_contains_samples() {
    for kind in [NormKind::L2, NormKind::Linf] {
        let r = baseline_report("robot-arm", kind, 300);
        assert!(r.passed(), "{kind}: {} violations, worst {}", r.violations, r.worst_margin);
    }
}

#[test]
fn vanderpol_baseline_tube_contains_samples() {
    for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
        let r = baseline_report("vanderpol", kind, 300);
        assert!(r.passed(), "{kind}: {} violations, worst {}", r.violations, r.worst_margin);
    }
}

#[test]
fn robot_arm_ilqr_iterates_stay_sound() {
    let mut config = RunConfig::preset("robot-arm").unwrap();
    config.limit_iterations(6);
    config.ilqr.snapshot_iterations = vec![2, 4, 6];
    let sys = config.system.build().unwrap();
    let n0 = config.initial_normotope().unwrap();
    let emb = Embedding::new(&sys, config.norm);
    let log = run(&emb, &EmbeddingState::from_normotope(&n0), config.grid().unwrap(), &config.ilqr).unwrap();
    assert!(!log.snapshots.is_empty());
    for snap in log.snapshots.iter().map(|s| &s.trajectory).chain([&log.best_trajectory]) {
        let r = mc_containment(&sys, &n0, snap, &IntervalVector::empty(), 300, 11, TOL).unwrap();
        assert!(r.passed(), "{} violations up to t = {}", r.violations, snap.t_end);
    }
}

#[test]
fn disturbed_linear_system_stays_inside() {
    let a = DMatrix::from_row_slice(2, 2, &[-0.5, 1.0, -1.0, -0.5]);
    let sys = Ltv::constant(a).with_input(DMatrix::identity(2, 2));
    let w_box = IntervalVector::from_bounds(&[-0.05, -0.05], &[0.05, 0.05]).unwrap();
    let n0 = Normotope::ball(NormKind::L2, DVector::from_vec(vec![1.0, 0.0]), 0.2).unwrap();
    let emb = Embedding::new(&sys, NormKind::L2).with_disturbance(w_box.clone());
    let grid = normotope::TimeGrid::new(0.0, 3.0, 1e-3).unwrap();
    let traj = emb
        .simulate(&EmbeddingState::from_normotope(&n0), &HypercontrolSchedule::zeros(grid, 2), Policy::Adjoint, f64::INFINITY)
        .unwrap();
    assert!(!traj.truncated);
    // The disturbance grows the offset; the tube still has to hold every path.
    assert!(traj.last_state().offset > 1.0);
    let r = mc_containment(&sys, &n0, &traj, &w_box, 400, 5, TOL).unwrap();
    assert!(r.passed(), "{} violations, worst {}", r.violations, r.worst_margin);
}

#[test]
fn shrunk_tubes_are_caught() {
    let config = RunConfig::preset("vanderpol").unwrap();
    let sys = config.system.build().unwrap();
    let n0 = config.initial_normotope().unwrap();
    let emb = Embedding::new(&sys, config.norm);
    let schedule = HypercontrolSchedule::zeros(config.grid().unwrap(), 2);
    let traj = emb
        .simulate(&EmbeddingState::from_normotope(&n0), &schedule, Policy::Adjoint, config.ilqr.phi_max)
        .unwrap();
    let r = mc_containment(&sys, &n0, &traj.with_scaled_offsets(0.9), &IntervalVector::empty(), 200, 1, TOL).unwrap();
    assert!(!r.passed());
    assert!(r.violations >= 100);
}
