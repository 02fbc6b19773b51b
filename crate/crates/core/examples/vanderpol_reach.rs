//! One forward pass of the embedding for Van der Pol: the pure adjoint tube
//! and where the volume bound stops it, then the same tube in the ℓ∞ norm.
//!
//! ```text
//! cargo run --release --example vanderpol_reach
//! ```

use nalgebra::{DMatrix, DVector};
use normotope::dynamics::VanDerPol;
use normotope::{Embedding, EmbeddingState, HypercontrolSchedule, NormKind, Policy, TimeGrid};

fn main() -> normotope::Result<()> {
    let sys = VanDerPol::default();
    let x0 = EmbeddingState::new(DVector::from_vec(vec![-2.0, 0.0]), DMatrix::identity(2, 2) * 80.0, 1.0)?;
    let grid = TimeGrid::new(0.0, 7.0, 0.01)?;
    let schedule = HypercontrolSchedule::zeros(grid, 2);

    for (kind, phi_max) in [(NormKind::L2, -1.75), (NormKind::L2, f64::INFINITY), (NormKind::Linf, -1.75)] {
        let emb = Embedding::new(&sys, kind);
        let traj = emb.simulate(&x0, &schedule, Policy::Adjoint, phi_max)?;
        println!("{kind}, phi_max = {phi_max}: t_end = {:.2}, reason: {}", traj.t_end, traj.truncation_reason.as_deref().unwrap_or("reached t_f"));
        for k in (0..traj.len()).step_by(25) {
            let s = &traj.states[k];
            println!(
                "  t = {:4.2}  center = ({:+.3}, {:+.3})  y = {:.3e}  phi = {:+.3}",
                traj.times[k], s.center[0], s.center[1], s.offset, traj.phi[k]
            );
        }
    }
    Ok(())
}
