//! Convergence of the fundamental-solutions discretization on the 3D
//! unit-volume ball: eigenvalue errors for sigma_1, sigma_7, sigma_15
//! against the collocation count. The error decays roughly exponentially
//! in sqrt(M) until conditioning saturates it.
//!
//!     cargo run --release --example mfs_convergence

use steklov::geometry::build_quadrature;
use steklov::mfs::{solve_eigen, MfsSystem};
use steklov::sphere_points::build_collocation;
use steklov::{BallOracle, Dimension, GridResolution, HarmonicCoefficients};

fn main() -> steklov::Result<()> {
    let oracle = BallOracle::unit_volume(Dimension::Three);
    let ball = HarmonicCoefficients::ball(Dimension::Three, 2, oracle.radius())?;
    let exact = oracle.eigenvalues(16);
    let quad = build_quadrature(&ball, GridResolution::ThreeD { theta: 32, phi: 64 })?;

    println!("{:>6} {:>12} {:>12} {:>12}", "M", "err(s1)", "err(s7)", "err(s15)");
    for m in [200, 400, 800, 1600] {
        let colloc = build_collocation(&ball, m, 3.0, 0.2, 11)?;
        let system = MfsSystem::assemble(colloc)?;
        let sol = solve_eigen(&system, 15, &quad)?;
        println!(
            "{m:6} {:12.3e} {:12.3e} {:12.3e}",
            (sol.eigenvalue(1) - exact[1]).abs(),
            (sol.eigenvalue(7) - exact[7]).abs(),
            (sol.eigenvalue(15) - exact[15]).abs()
        );
    }
    Ok(())
}
