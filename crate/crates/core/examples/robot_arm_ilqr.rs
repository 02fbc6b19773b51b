//! Reach-iLQR on the two-link robot arm: 20 iterations from the pure adjoint
//! tube, printing how far each iterate reaches and its final volume cost.
//!
//! ```text
//! cargo run --release --example robot_arm_ilqr
//! ```

use nalgebra::{DMatrix, DVector};
use normotope::dynamics::RobotArm;
use normotope::reach_ilqr::{run, IlqrConfig};
use normotope::{Embedding, EmbeddingState, NormKind, TimeGrid};

fn main() -> normotope::Result<()> {
    let sys = RobotArm::default();
    let emb = Embedding::new(&sys, NormKind::L2);
    let x0 = EmbeddingState::new(
        DVector::from_vec(vec![1.5, 1.5, 0.0, 0.0]),
        DMatrix::identity(4, 4) * 10.0,
        1.0,
    )?;
    let grid = TimeGrid::new(0.0, 10.0, 0.01)?;
    let log = run(&emb, &x0, grid, &IlqrConfig::robot_arm())?;

    println!("{:>4} {:>8} {:>10} {:>8}", "iter", "t_end", "phi", "secs");
    for it in &log.iterates {
        println!(
            "{:>4} {:>8.2} {:>10.4} {:>8.2}",
            it.iteration, it.t_end, it.phi_terminal, it.cumulative_seconds
        );
    }
    let best = log.best();
    println!(
        "best: iteration {} reaches t = {:.2} with phi = {:.4} ({})",
        best.iteration, best.t_end, best.phi_terminal, log.stop_reason
    );
    Ok(())
}
