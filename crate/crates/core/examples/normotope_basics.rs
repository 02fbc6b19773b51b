//! Normotopes in the three norms: membership, interval hull, volume cost,
//! H-representation and sampling.
//!
//! ```text
//! cargo run --example normotope_basics
//! ```

use nalgebra::{DMatrix, DVector};
use normotope::{NormKind, Normotope};

fn main() -> normotope::Result<()> {
    let center = DVector::from_vec(vec![1.0, -1.0]);
    let shape = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);

    for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
        let set = Normotope::new(kind, center.clone(), shape.clone(), 1.0)?;
        let hull = set.interval_hull()?;
        println!("{kind}: volume cost {:.4}", set.volume_cost()?);
        println!("  interval hull {} x {}", hull[0], hull[1]);

        let probe = DVector::from_vec(vec![1.3, -0.6]);
        println!("  gauge of {:?} = {:.4}, contained: {}", probe.as_slice(), set.gauge(&probe)?, set.contains(&probe, 0.0)?);

        if kind != NormKind::L2 {
            let hrep = set.to_hrep()?;
            println!("  H-representation with {} half-spaces", hrep.h.nrows());
        }
        let inside = set.sample(7, 1000)?.iter().filter(|x| set.contains(x, 1e-12).unwrap_or(false)).count();
        println!("  {inside}/1000 uniform samples inside");
    }

    let json = serde_json::to_string(&Normotope::ball(NormKind::L2, center, 0.5)?)?;
    println!("\nJSON: {json}");
    Ok(())
}
