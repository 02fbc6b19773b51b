//! Interval arithmetic and the LDI corners of the Van der Pol field on a box.
//!
//! ```text
//! cargo run --example interval_ldi
//! ```

use normotope::dynamics::{ldi_corners, VanDerPol, VectorField};
use normotope::interval::{interval_matvec, DEFAULT_CORNER_CAP};
use normotope::{Interval, IntervalVector};

fn main() -> normotope::Result<()> {
    let a = Interval::new(-1.0, 2.0);
    let b = Interval::new(3.0, 4.0);
    println!("a = {a}, b = {b}");
    println!("a + b = {}, a - b = {}, a * b = {}, a / b = {}", a + b, a - b, a * b, a / b);

    let sys = VanDerPol::default();
    let x_box = IntervalVector::from_bounds(&[-2.1, -0.1], &[-1.9, 0.1])?;
    let anchor = [-2.0, 0.0];
    let m = sys.interval_jacobian(0.0, &x_box, &anchor)?;
    println!("\ninterval Jacobian on X = {} x {}:", x_box[0], x_box[1]);
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
        println!("  [{}]", row.join(", "));
    }

    let ldi = ldi_corners(&sys, 0.0, &x_box, &IntervalVector::empty(), &anchor, &[], DEFAULT_CORNER_CAP)?;
    println!("{} corner matrices:", ldi.mx.len());
    for c in &ldi.mx {
        println!("{c}");
    }

    // Every point of the box satisfies f(x) - f(anchor) ∈ [M](x - anchor).
    let x = [-1.95, 0.07];
    let fx = sys.field(0.0, &x, &[]);
    let fa = sys.field(0.0, &anchor, &[]);
    let dx = IntervalVector::from_points(&[x[0] - anchor[0], x[1] - anchor[1]]);
    let enclosure = interval_matvec(&m, &dx)?;
    for i in 0..2 {
        let d = fx[i] - fa[i];
        println!("f_{i}(x) - f_{i}(anchor) = {d:+.6} in {}: {}", enclosure[i], enclosure[i].contains(d));
    }
    Ok(())
}
