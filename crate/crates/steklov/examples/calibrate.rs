//! Scratch calibration: prints raw spectra, filter survival, and gradient
//! agreement at several resolutions. Not part of the public examples.

use std::time::Instant;

use steklov::ball::BallOracle;
use steklov::geometry::{build_quadrature, GridResolution, HarmonicCoefficients};
use steklov::harmonics::{BasisIndex, BasisTable, Dimension};
use steklov::mfs::{eigenvalues_only, solve_eigen, MfsSystem};
use steklov::shape_opt::{cost_gradient, CostEvaluator};
use steklov::sphere_points::{
    build_collocation, min_pairwise_distance, quasi_uniform_seed, refine_collocation,
};

fn main() {
    let pick: Vec<String> = std::env::args().skip(1).collect();
    let want = |s: &str| pick.is_empty() || pick.iter().any(|p| p == s);
    if want("a") {
        section_a();
    }
    if want("b") {
        section_b();
    }
    if want("c") {
        section_c();
    }
    if want("d") {
        section_d();
    }
    if want("e") {
        section_e();
    }
    if want("f") {
        section_f();
    }
}

fn section_f() {
    println!("== F: eigensolve timing breakdown, 3D ball ==");
    let oracle = BallOracle::unit_volume(Dimension::Three);
    let coeffs = HarmonicCoefficients::ball(Dimension::Three, 2, oracle.radius()).unwrap();
    let quad = build_quadrature(&coeffs, GridResolution::ThreeD { theta: 32, phi: 64 }).unwrap();
    for m in [300usize, 400, 500, 600, 800] {
        let colloc = build_collocation(&coeffs, m, 3.0, 0.2, 11).unwrap();
        let t0 = Instant::now();
        let system = MfsSystem::assemble(colloc).unwrap();
        let t1 = Instant::now();
        let _ = eigenvalues_only(&system, 11).unwrap();
        let t2 = Instant::now();
        let _ = solve_eigen(&system, 11, &quad).unwrap();
        let t3 = Instant::now();
        println!(
            "M={m:5}  assemble={:.2}s evs_only={:.2}s full={:.2}s",
            (t1 - t0).as_secs_f64(),
            (t2 - t1).as_secs_f64(),
            (t3 - t2).as_secs_f64()
        );
    }
}

fn section_a() {
    println!("== A: 3D ball spectra vs collocation count ==");
    let oracle = BallOracle::unit_volume(Dimension::Three);
    let exact = oracle.eigenvalues(16);
    let coeffs = HarmonicCoefficients::ball(Dimension::Three, 2, oracle.radius()).unwrap();
    let quad = build_quadrature(&coeffs, GridResolution::ThreeD { theta: 32, phi: 64 }).unwrap();
    for m in [200, 300, 400, 600, 800, 1000, 1600] {
        let t0 = Instant::now();
        let colloc = build_collocation(&coeffs, m, 3.0, 0.2, 11).unwrap();
        let t1 = Instant::now();
        let system = MfsSystem::assemble(colloc).unwrap();
        match solve_eigen(&system, 15, &quad) {
            Ok(sol) => {
                let t2 = Instant::now();
                let errs: Vec<String> = [0usize, 1, 4, 9, 15]
                    .iter()
                    .map(|&k| format!("e{k}={:.2e}", (sol.eigenvalue(k) - exact[k]).abs()))
                    .collect();
                println!(
                    "M={m:5}  {}  cond>={:.1e}  riesz={:.1}s solve={:.1}s",
                    errs.join(" "),
                    sol.conditioning(),
                    (t1 - t0).as_secs_f64(),
                    (t2 - t1).as_secs_f64()
                );
                let head: Vec<String> =
                    (0..8).map(|k| format!("{:+.6}", sol.eigenvalue(k))).collect();
                println!("          first 8: {}", head.join(" "));
            }
            Err(e) => println!("M={m:5}  FAILED: {e}"),
        }
    }
}

fn section_b() {
    println!("== B: 4D ball spectra, refinement variants ==");
    let oracle = BallOracle::unit_volume(Dimension::Four);
    let exact = oracle.eigenvalues(15);
    let coeffs = HarmonicCoefficients::ball(Dimension::Four, 2, oracle.radius()).unwrap();
    let quad = build_quadrature(
        &coeffs,
        GridResolution::FourD { beta: 16, theta: 16, phi: 32 },
    )
    .unwrap();
    for m in [1000usize, 2000] {
        for iters in [0usize, 500, 2500] {
            let t0 = Instant::now();
            let seed = quasi_uniform_seed(Dimension::Four, m, 3);
            let colloc = refine_collocation(&coeffs, &seed, 3.0, 0.2, iters).unwrap();
            let t1 = Instant::now();
            let mind = min_pairwise_distance(colloc.points());
            let system = MfsSystem::assemble(colloc).unwrap();
            let tev = Instant::now();
            let ev = eigenvalues_only(&system, 14);
            let tev = tev.elapsed().as_secs_f64();
            match solve_eigen(&system, 14, &quad) {
                Ok(sol) => {
                    let t2 = Instant::now();
                    let errs: Vec<String> = [0usize, 1, 5, 13]
                        .iter()
                        .map(|&k| format!("e{k}={:.2e}", (sol.eigenvalue(k) - exact[k]).abs()))
                        .collect();
                    let spread1 =
                        sol.eigenvalue(4) - sol.eigenvalue(1);
                    let spread2 = sol.eigenvalue(13) - sol.eigenvalue(5);
                    println!(
                        "M={m:5} it={iters:4}  {}  sp1={spread1:.1e} sp2={spread2:.1e} mind={mind:.3} sigma1={:.6}  riesz={:.1}s evs={tev:.1}s solve={:.1}s evs_ok={}",
                        errs.join(" "),
                        sol.eigenvalue(1),
                        (t1 - t0).as_secs_f64(),
                        (t2 - t1).as_secs_f64(),
                        ev.is_ok()
                    );
                }
                Err(e) => println!("M={m:5} it={iters:4}  FAILED: {e}"),
            }
        }
    }
}

fn perturbed_domain() -> HarmonicCoefficients {
    let table = BasisTable::new(Dimension::Three, 2);
    let mut a = vec![0.0; table.len()];
    a[0] = (4.0 * std::f64::consts::PI).sqrt();
    a[table.position(BasisIndex::three(1, 1)).unwrap()] = 0.2;
    a[table.position(BasisIndex::three(2, 0)).unwrap()] = 0.1;
    HarmonicCoefficients::new(Dimension::Three, 2, a).unwrap()
}

fn section_c() {
    println!("== C: costs_only reproduces solve() on the same preimages ==");
    let coeffs = perturbed_domain();
    for m in [300, 600] {
        let mut ev = CostEvaluator::new(Dimension::Three, m);
        ev.resolution = GridResolution::ThreeD { theta: 32, phi: 64 };
        let eval = ev.solve(&coeffs, 5).unwrap();
        match ev.costs_only(&coeffs, 5, &eval.preimages) {
            Ok(costs) => {
                let worst = costs
                    .iter()
                    .zip(&eval.costs)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                println!("M={m:5}  max |costs_only - solve| = {worst:.3e}");
                println!(
                    "          solve costs: {}",
                    eval.costs.iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>().join(" ")
                );
            }
            Err(e) => println!("M={m:5}  costs_only FAILED: {e}"),
        }
    }
}

fn section_d() {
    println!("== D: cost gradient vs finite differences (perturbed ball) ==");
    let coeffs = perturbed_domain();
    for m in [400, 800] {
        let mut ev = CostEvaluator::new(Dimension::Three, m);
        ev.resolution = GridResolution::ThreeD { theta: 32, phi: 64 };
        let eval = ev.solve(&coeffs, 2).unwrap();
        println!(
            "M={m:5}  C1={:.8} C2={:.8} gap={:.4}",
            eval.costs[1],
            eval.costs[2],
            eval.costs[2] - eval.costs[1]
        );
        let grad = cost_gradient(&coeffs, 1, &eval.solution, &eval.quadrature).unwrap();
        let h = 1e-5;
        let mut dir = vec![0.0; coeffs.len()];
        for p in 0..coeffs.len() {
            dir.fill(0.0);
            dir[p] = 1.0;
            let fd = match (
                ev.costs_only(&coeffs.perturbed(&dir, h).unwrap(), 1, &eval.preimages),
                ev.costs_only(&coeffs.perturbed(&dir, -h).unwrap(), 1, &eval.preimages),
            ) {
                (Ok(cp), Ok(cm)) => (cp[1] - cm[1]) / (2.0 * h),
                (a, b) => {
                    println!("  p={p}: FD failed: {:?} {:?}", a.err(), b.err());
                    continue;
                }
            };
            println!(
                "  p={p}: analytic={:+.6}  fd={:+.6}  diff={:.2e}",
                grad[p],
                fd,
                (grad[p] - fd).abs()
            );
        }
    }
}

fn section_e() {
    println!("== E: ball gradients against closed forms ==");
    let oracle = BallOracle::unit_volume(Dimension::Three);
    let r = oracle.radius();
    let ball = HarmonicCoefficients::ball(Dimension::Three, 3, r).unwrap();
    for m in [400, 800] {
        let mut ev = CostEvaluator::new(Dimension::Three, m);
        ev.resolution = GridResolution::ThreeD { theta: 32, phi: 64 };
        let eval = ev.solve(&ball, 6).unwrap();
        // d sigma_1 / d a_00 for the raw eigenvalue of a ball of radius R
        // = -sqrt(4 pi) / a0^2 = -1 / (sqrt(4 pi) R^2); check against the
        // simple-eigenvalue formula for each of the three l=1 modes.
        let expected = -1.0 / ((4.0 * std::f64::consts::PI).sqrt() * r * r);
        for k in 1..4 {
            let g = steklov::shape_opt::eigenvalue_gradient(
                &ball,
                k,
                &eval.solution,
                &eval.quadrature,
            )
            .unwrap();
            let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            println!(
                "M={m:5} k={k}: dsigma/da00 = {:+.8} (expect {expected:+.8})  |g|={gnorm:.6}",
                g[0]
            );
        }
        // Min-norm point of the cost-gradient cluster at the ball.
        let grads: Vec<Vec<f64>> = (1..4)
            .map(|j| cost_gradient(&ball, j, &eval.solution, &eval.quadrature).unwrap())
            .collect();
        let (point, _) = steklov::qp::min_norm_point(&grads).unwrap();
        let pnorm = point.iter().map(|p| p * p).sum::<f64>().sqrt();
        println!("M={m:5} cluster min-norm point |p| = {pnorm:.3e}");
    }
}
