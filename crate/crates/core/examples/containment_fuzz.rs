//! Random hypercontrol schedules on the robot arm, each tube checked by
//! Monte Carlo. Set NORMOTOPE_THREADS to cap the worker threads.
//!
//! ```text
//! cargo run --release --example containment_fuzz
//! ```

use nalgebra::DMatrix;
use normotope::cli::RunConfig;
use normotope::verify::mc_containment;
use normotope::{Embedding, EmbeddingState, HypercontrolSchedule, IntervalVector, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> normotope::Result<()> {
    let config = RunConfig::preset("robot-arm")?;
    let sys = config.system.build()?;
    let n0 = config.initial_normotope()?;
    let emb = Embedding::new(&sys, config.norm);
    let grid = config.grid()?;
    let x0 = EmbeddingState::from_normotope(&n0);

    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = DMatrix::from_fn(4, 4, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal));
        let schedule = HypercontrolSchedule::constant(grid, u);
        let traj = emb.simulate(&x0, &schedule, Policy::Adjoint, config.ilqr.phi_max)?;
        let report = mc_containment(&sys, &n0, &traj, &IntervalVector::empty(), 500, seed, 1e-6)?;
        println!(
            "schedule {seed}: tube to t = {:5.2}, {} samples, {} violations, worst margin {:+.3e}",
            traj.t_end, report.samples, report.violations, report.worst_margin
        );
    }
    Ok(())
}
