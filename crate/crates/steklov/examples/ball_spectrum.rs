//! Computes the Steklov spectrum of the unit-volume ball in 3D and 4D and
//! compares it with the exact values sigma = l / R, whose multiplicities are
//! 2l+1 in 3D and (l+1)^2 in 4D.
//!
//!     cargo run --release --example ball_spectrum

use steklov::{BallOracle, CostEvaluator, Dimension, HarmonicCoefficients};

fn main() -> steklov::Result<()> {
    for (dimension, collocation, kmax) in
        [(Dimension::Three, 600, 15), (Dimension::Four, 1200, 13)]
    {
        let oracle = BallOracle::unit_volume(dimension);
        let ball = HarmonicCoefficients::ball(dimension, 2, oracle.radius())?;
        let exact = oracle.eigenvalues(kmax + 1);

        let evaluator = CostEvaluator::new(dimension, collocation);
        let eval = evaluator.solve(&ball, kmax)?;

        println!("{dimension} unit-volume ball, R = {:.6}, M = {collocation}", oracle.radius());
        println!("{:>4} {:>14} {:>14} {:>10}", "k", "computed", "exact", "error");
        for (k, &sigma) in eval.solution.eigenvalues().iter().enumerate() {
            println!(
                "{k:4} {sigma:14.8} {:14.8} {:10.2e}",
                exact[k],
                (sigma - exact[k]).abs()
            );
        }
        println!();
    }
    Ok(())
}
