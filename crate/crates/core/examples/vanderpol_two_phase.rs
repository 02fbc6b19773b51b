//! Van der Pol with a tight volume bound: the pure adjoint tube breaks the
//! bound before t = 7, and two phases of Reach-iLQR (R = 0.5, then R = 5)
//! push the point where the bound breaks further out. Prints the best iterate
//! and whether it reached the horizon.
//!
//! ```text
//! cargo run --release --example vanderpol_two_phase
//! ```

use nalgebra::{DMatrix, DVector};
use normotope::dynamics::VanDerPol;
use normotope::reach_ilqr::{run, IlqrConfig};
use normotope::{Embedding, EmbeddingState, NormKind, TimeGrid};

fn main() -> normotope::Result<()> {
    let sys = VanDerPol::default();
    let emb = Embedding::new(&sys, NormKind::L2);
    let x0 = EmbeddingState::new(DVector::from_vec(vec![-2.0, 0.0]), DMatrix::identity(2, 2) * 80.0, 1.0)?;
    let grid = TimeGrid::new(0.0, 7.0, 0.01)?;
    let log = run(&emb, &x0, grid, &IlqrConfig::vanderpol())?;

    println!(
        "pure adjoint: t_end = {:.2}, truncated = {}",
        log.initial_trajectory.t_end, log.initial_trajectory.truncated
    );
    let mut first_full = None;
    for it in &log.iterates {
        if first_full.is_none() && it.t_end >= grid.tf {
            first_full = Some(it.iteration);
        }
        if it.iteration % 100 == 0 || it.iteration == 1 {
            println!(
                "iter {:>5} phase {} t_end {:>5.2} phi {:>9.4} ({:.1} s)",
                it.iteration, it.phase, it.t_end, it.phi_terminal, it.cumulative_seconds
            );
        }
    }
    match first_full {
        Some(i) => println!("horizon first reached at iteration {i}"),
        None => println!("horizon never reached"),
    }
    let best = log.best();
    println!(
        "best: iteration {} t_end {:.2} phi {:.4} after {} iterations ({})",
        best.iteration,
        best.t_end,
        best.phi_terminal,
        log.iterates.len(),
        log.stop_reason
    );
    Ok(())
}
