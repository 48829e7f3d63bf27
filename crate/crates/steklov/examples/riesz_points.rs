//! Collocation point generation on a non-spherical boundary: a quasi-uniform
//! seed on the unit sphere is mapped to the surface r = 1 + 0.4 S_2^0 and
//! relaxed there by Riesz-energy descent. Refinement should visibly raise
//! the minimum pairwise distance.
//!
//!     cargo run --release --example riesz_points

use steklov::harmonics::{BasisIndex, BasisTable};
use steklov::sphere_points::{
    min_pairwise_distance, quasi_uniform_seed, refine_collocation,
};
use steklov::{Dimension, HarmonicCoefficients};

fn main() -> steklov::Result<()> {
    let table = BasisTable::new(Dimension::Three, 2);
    let mut a = vec![0.0; table.len()];
    a[0] = (4.0 * std::f64::consts::PI).sqrt();
    a[table.position(BasisIndex::three(2, 0)).expect("degree 2 in table")] = 0.4;
    let coeffs = HarmonicCoefficients::new(Dimension::Three, 2, a)?;

    let count = 1000;
    let seed = quasi_uniform_seed(Dimension::Three, count, 0);
    let raw = refine_collocation(&coeffs, &seed, 3.0, 0.2, 0)?;
    let refined = refine_collocation(&coeffs, &seed, 3.0, 0.2, 500)?;

    let d0 = min_pairwise_distance(raw.points());
    let d1 = min_pairwise_distance(refined.points());
    println!("{count} points on r = 1 + 0.4 S_2^0");
    println!("unrefined  min distance {d0:.6}  energy {:.3}", raw.energy());
    println!("refined    min distance {d1:.6}  energy {:.3}", refined.energy());
    println!("min-distance gain {:+.1}%", 100.0 * (d1 / d0 - 1.0));

    steklov::io::write_points(refined.points(), Dimension::Three, "points.txt".as_ref())?;
    steklov::io::write_points(refined.sources(), Dimension::Three, "sources.txt".as_ref())?;
    println!("wrote points.txt and sources.txt");
    Ok(())
}
