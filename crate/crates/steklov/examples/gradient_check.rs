//! Checks the analytic shape gradient of the volume-normalized cost
//! C_1 = sigma_1 |Omega|^(1/3) against central finite differences on a
//! randomly perturbed ball. The collocation pre-images are shared between
//! the plus and minus domains so the finite difference sees a smooth
//! function of the coefficients.
//!
//!     cargo run --release --example gradient_check

use steklov::shape_opt::cost_gradient;
use steklov::{CostEvaluator, Dimension};

fn main() -> steklov::Result<()> {
    let coeffs = steklov::shape_opt::noisy_ball(Dimension::Three, 2, 0.1, 42)?;
    let evaluator = CostEvaluator::new(Dimension::Three, 500);

    let eval = evaluator.solve(&coeffs, 2)?;
    let grad = cost_gradient(&coeffs, 1, &eval.solution, &eval.quadrature)?;

    println!("C_1 = {:.8}", eval.costs[1]);
    println!("{:>4} {:>14} {:>14} {:>10}", "p", "analytic", "central fd", "|diff|");
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for p in 0..coeffs.len() {
        let mut dir = vec![0.0; coeffs.len()];
        dir[p] = 1.0;
        let plus = coeffs.perturbed(&dir, h)?;
        let minus = coeffs.perturbed(&dir, -h)?;
        let cp = evaluator.costs_only(&plus, 1, &eval.preimages)?[1];
        let cm = evaluator.costs_only(&minus, 1, &eval.preimages)?[1];
        let fd = (cp - cm) / (2.0 * h);
        let diff = (fd - grad[p]).abs();
        worst = worst.max(diff);
        println!("{p:4} {:14.8} {fd:14.8} {diff:10.2e}", grad[p]);
    }
    let scale = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    println!("worst component difference {worst:.2e} (gradient norm {scale:.3})");
    Ok(())
}
