//! The adjoint policy is optimal for the volume cost on linear systems:
//! the Hamiltonian gap of any other choice equals a sum of eigenvalue gaps.
//!
//! ```text
//! cargo run --release --example pmp_check
//! ```

use nalgebra::{DMatrix, DVector};
use normotope::dynamics::ltv;
use normotope::normotope::checked_inverse;
use normotope::verify::{hamiltonian_gap, pmp_check};
use normotope::{NormKind, Normotope};

fn main() -> normotope::Result<()> {
    let n0 = Normotope::new(NormKind::L2, DVector::from_vec(vec![0.5, 0.5]), DMatrix::identity(2, 2) * 4.0, 1.0)?;
    let sys = ltv(2, |t| DMatrix::from_row_slice(2, 2, &[-0.2, 1.0, -1.0 - 0.5 * t, 0.1]));
    let report = pmp_check(&sys, &n0, 2.0, 1e-3, 1000, 1)?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    // A hand-picked symmetric Ũ = diag(1, -1): the gap is 4.
    let p_alpha = checked_inverse(&n0.shape)?.transpose() * -2.0;
    let u = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
    let (gap, identity) = hamiltonian_gap(&p_alpha, &n0.shape, 4.0 / n0.offset, n0.offset, &u);
    println!("diag(1, -1): gap {gap}, eigenvalue sum {identity}");
    Ok(())
}
