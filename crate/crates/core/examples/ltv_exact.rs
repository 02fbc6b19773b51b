//! For a linear system the adjoint hypercontrol makes the tube exact: the
//! offset stays put and boundary points stay on the boundary.
//!
//! ```text
//! cargo run --release --example ltv_exact
//! ```

use nalgebra::{DMatrix, DVector};
use normotope::dynamics::{ltv, Ltv};
use normotope::verify::ltv_exactness;
use normotope::{NormKind, Normotope};

fn main() -> normotope::Result<()> {
    let n0 = Normotope::new(
        NormKind::L2,
        DVector::from_vec(vec![1.0, 0.0]),
        DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 1.0]),
        1.0,
    )?;
    let rotation = Ltv::rotation();
    let tf = std::f64::consts::FRAC_PI_2;
    let oracle = &n0.shape * (rotation.a(0.0) * -tf).exp();

    for h in [1e-2, 1e-3, 1e-4] {
        let r = ltv_exactness(&rotation, &n0, tf, h)?;
        println!(
            "h = {h:.0e}: |y - y0| = {:.1e}, boundary deviation {:.2e}, |alpha - alpha0 e^(-At)| = {:.2e}",
            r.offset_deviation,
            r.boundary_deviation,
            (&r.final_set.shape - &oracle).amax()
        );
    }

    let damped = ltv(2, |t| DMatrix::from_row_slice(2, 2, &[-0.5, 1.0, -1.0 - t, -0.2]));
    let r = ltv_exactness(&damped, &n0, 2.0, 1e-3)?;
    println!("time-varying damped system: |y - y0| = {:.1e}", r.offset_deviation);
    Ok(())
}
