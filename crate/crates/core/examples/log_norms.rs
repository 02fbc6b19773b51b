//! Logarithmic norms against their limit definition, and induced norms.
//!
//! ```text
//! cargo run --example log_norms
//! ```

use nalgebra::DMatrix;
use normotope::matrix_norms::{log_norm, op_norm};
use normotope::NormKind;

fn main() {
    let a = DMatrix::from_row_slice(3, 3, &[-2.0, 1.0, 0.5, 0.0, -3.0, 1.0, 0.3, -0.2, -1.0]);
    let id = DMatrix::<f64>::identity(3, 3);
    println!("{:>5} {:>10} {:>14} {:>10}", "norm", "mu(A)", "(|I+hA|-1)/h", "|A|");
    for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
        let h = 1e-6;
        let limit = (op_norm(kind, &(&id + &a * h)) - 1.0) / h;
        println!("{:>5} {:>10.6} {:>14.6} {:>10.6}", kind.to_string(), log_norm(kind, &a), limit, op_norm(kind, &a));
    }
    // A negative log norm means contraction: every solution of ẋ = Ax
    // shrinks at least as fast as e^{μ(A)t} in that norm.
    let rotation = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    println!("\nrotation: mu_2 = {}, mu_inf = {}", log_norm(NormKind::L2, &rotation), log_norm(NormKind::Linf, &rotation));
}
