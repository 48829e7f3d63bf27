//! Gradient ascent on the volume-normalized Steklov eigenvalues
//! C_k = sigma_k |Omega|^(1/d).
//!
//! The shape derivative of a simple eigenvalue under the normal velocity
//! field V.n is sigma' = int (|grad w|^2 - 2 sigma^2 w^2 - sigma H w^2) V.n ds
//! with w normalized to unit boundary L2 norm. Radial perturbations by one
//! basis function give V.n = S_p (xhat.n), and (xhat.n) ds reduces to
//! r^(d-1) dxi on the parameter sphere. Nearly equal eigenvalues are moved
//! jointly through the max-min direction of their gradients.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{build_quadrature, BoundaryQuadrature, GridResolution, HarmonicCoefficients};
use crate::harmonics::Dimension;
use crate::mfs::{eigenvalues_only, solve_eigen, EigenSolution, MfsSystem};
use crate::qp::maxmin_direction;
use crate::sphere_points::{build_collocation, refine_collocation};
use crate::vecmath::Vec4;

/// Armijo constant for the ascent line search on the cluster minimum.
pub const ARMIJO_C: f64 = 1e-4;

/// Default cluster threshold in cost units.
pub const DEFAULT_EPSILON: f64 = 0.01;

const MAX_HALVINGS: usize = 20;

/// Discretization used for every cost and gradient evaluation: collocation
/// budget, source offset, Riesz exponent, and quadrature resolution.
#[derive(Clone, Debug)]
pub struct CostEvaluator {
    pub collocation_count: usize,
    pub delta: f64,
    pub riesz_exponent: f64,
    pub resolution: GridResolution,
    /// Seed for the quasi-uniform collocation seed configuration.
    pub seed: u64,
    /// Riesz iterations when re-refining collocation between optimizer
    /// iterations. Within one iteration the angles stay fixed.
    pub warm_riesz_iters: usize,
}

/// One full forward evaluation of a domain.
pub struct Evaluation {
    pub solution: EigenSolution,
    pub quadrature: BoundaryQuadrature,
    /// Collocation pre-images on the unit sphere, for warm starts.
    pub preimages: Vec<Vec4>,
    pub volume: f64,
    /// C_j = sigma_j |Omega|^(1/d) for j = 0..=kmax.
    pub costs: Vec<f64>,
}

impl CostEvaluator {
    pub fn new(dimension: Dimension, collocation_count: usize) -> Self {
        Self {
            collocation_count,
            delta: 0.2,
            riesz_exponent: 3.0,
            resolution: GridResolution::default_for(dimension),
            seed: 0,
            warm_riesz_iters: 80,
        }
    }

    /// Cold evaluation: fresh quasi-uniform collocation seed, full Riesz
    /// refinement, assembly, and eigensolve through index kmax.
    pub fn solve(&self, coeffs: &HarmonicCoefficients, kmax: usize) -> Result<Evaluation> {
        let colloc = build_collocation(
            coeffs,
            self.collocation_count,
            self.riesz_exponent,
            self.delta,
            self.seed,
        )?;
        self.finish(coeffs, kmax, colloc)
    }

    /// Warm evaluation: re-refine the given pre-images on this domain.
    pub fn solve_warm(
        &self,
        coeffs: &HarmonicCoefficients,
        kmax: usize,
        preimages: &[Vec4],
    ) -> Result<Evaluation> {
        let colloc = refine_collocation(
            coeffs,
            preimages,
            self.riesz_exponent,
            self.delta,
            self.warm_riesz_iters,
        )?;
        self.finish(coeffs, kmax, colloc)
    }

    fn finish(
        &self,
        coeffs: &HarmonicCoefficients,
        kmax: usize,
        colloc: crate::sphere_points::CollocationSet,
    ) -> Result<Evaluation> {
        let quadrature = build_quadrature(coeffs, self.resolution)?;
        let preimages = colloc.preimages().to_vec();
        let system = MfsSystem::assemble(colloc)?;
        let solution = solve_eigen(&system, kmax, &quadrature)?;
        let volume = quad_volume(&quadrature);
        let costs = normalized_costs(solution.eigenvalues(), volume, coeffs.dimension());
        Ok(Evaluation { solution, quadrature, preimages, volume, costs })
    }

    /// Costs of a line-search candidate: the pre-images are mapped onto the
    /// candidate surface without re-refinement (the angles stay fixed within
    /// an optimizer iteration) and only eigenvalues are computed.
    pub fn costs_only(
        &self,
        coeffs: &HarmonicCoefficients,
        kmax: usize,
        preimages: &[Vec4],
    ) -> Result<Vec<f64>> {
        let colloc = refine_collocation(coeffs, preimages, self.riesz_exponent, self.delta, 0)?;
        let system = MfsSystem::assemble(colloc)?;
        let sigma = eigenvalues_only(&system, kmax)?;
        let quadrature = build_quadrature(coeffs, self.resolution)?;
        let volume = quad_volume(&quadrature);
        Ok(normalized_costs(&sigma, volume, coeffs.dimension()))
    }

    /// The normalized cost C_k of one domain, evaluated cold.
    pub fn cost(&self, coeffs: &HarmonicCoefficients, k: usize) -> Result<f64> {
        let eval = self.solve(coeffs, k.max(1))?;
        Ok(eval.costs[k])
    }
}

/// Volume from the boundary quadrature: |Omega| = (1/d) int r^d dxi.
pub fn quad_volume(quad: &BoundaryQuadrature) -> f64 {
    let d = quad.dimension().ambient() as f64;
    quad.radii()
        .iter()
        .zip(quad.sphere_weights())
        .map(|(&r, &w)| w * r.powi(quad.dimension().ambient() as i32))
        .sum::<f64>()
        / d
}

fn normalized_costs(sigma: &[f64], volume: f64, dimension: Dimension) -> Vec<f64> {
    let scale = volume.powf(1.0 / dimension.ambient() as f64);
    sigma.iter().map(|s| s * scale).collect()
}

/// Largest M >= 1 with C_(k+M-1) - C_k <= eps < C_(k+M) - C_k. Needs at
/// least one cost beyond the cluster to certify the gap.
pub fn cluster_size(costs: &[f64], k: usize, epsilon: f64) -> Result<usize> {
    if costs.len() < k + 2 {
        return Err(Error::InsufficientEigenvalues { got: costs.len(), needed: k + 2 });
    }
    let mut end = k + 1;
    while end < costs.len() && costs[end] - costs[k] <= epsilon {
        end += 1;
    }
    if end == costs.len() {
        // The cluster runs off the solved window; its size is unknown.
        return Err(Error::InsufficientEigenvalues { got: costs.len(), needed: costs.len() + 1 });
    }
    Ok(end - k)
}

/// Gradient of sigma_k with respect to the radial expansion coefficients,
/// from the simple-eigenvalue shape derivative. Component p integrates
/// (|grad w_k|^2 - 2 sigma_k^2 w_k^2 - sigma_k H w_k^2) S_p r^(d-1) over the
/// parameter sphere.
pub fn eigenvalue_gradient(
    coeffs: &HarmonicCoefficients,
    k: usize,
    solution: &EigenSolution,
    quad: &BoundaryQuadrature,
) -> Result<Vec<f64>> {
    check_grid(solution, quad)?;
    let sigma = solution.eigenvalue(k);
    let trace = solution.trace(k);
    let grad = solution.gradient(k);
    let radii = quad.radii();
    let curv = quad.curvatures();
    let wxi = quad.sphere_weights();
    let dm1 = quad.dimension().ambient() as i32 - 1;
    let factor: Vec<f64> = (0..quad.len())
        .map(|q| {
            let w2 = trace[q] * trace[q];
            let g2 = crate::vecmath::dot(&grad[q], &grad[q]);
            (g2 - 2.0 * sigma * sigma * w2 - sigma * curv[q] * w2)
                * radii[q].powi(dm1)
                * wxi[q]
        })
        .collect();
    let mut out = vec![0.0; coeffs.len()];
    quad.basis_integral(coeffs.table(), &factor, &mut out)?;
    Ok(out)
}

/// Gradient of the volume: component p integrates r^(d-1) S_p over the
/// parameter sphere.
pub fn volume_gradient_on_quad(
    coeffs: &HarmonicCoefficients,
    quad: &BoundaryQuadrature,
) -> Result<Vec<f64>> {
    let dm1 = quad.dimension().ambient() as i32 - 1;
    let factor: Vec<f64> = quad
        .radii()
        .iter()
        .zip(quad.sphere_weights())
        .map(|(&r, &w)| r.powi(dm1) * w)
        .collect();
    let mut out = vec![0.0; coeffs.len()];
    quad.basis_integral(coeffs.table(), &factor, &mut out)?;
    Ok(out)
}

/// Full cost gradient: grad C_k = V^(1/d) grad sigma_k
/// + sigma_k (1/d) V^(1/d - 1) grad V.
pub fn cost_gradient(
    coeffs: &HarmonicCoefficients,
    k: usize,
    solution: &EigenSolution,
    quad: &BoundaryQuadrature,
) -> Result<Vec<f64>> {
    let d = quad.dimension().ambient() as f64;
    let volume = quad_volume(quad);
    let vpow = volume.powf(1.0 / d);
    let sigma = solution.eigenvalue(k);
    let dsigma = eigenvalue_gradient(coeffs, k, solution, quad)?;
    let dvol = volume_gradient_on_quad(coeffs, quad)?;
    Ok(dsigma
        .iter()
        .zip(&dvol)
        .map(|(gs, gv)| vpow * gs + sigma * vpow / (d * volume) * gv)
        .collect())
}

fn check_grid(solution: &EigenSolution, quad: &BoundaryQuadrature) -> Result<()> {
    if solution.trace(0).len() != quad.len() {
        return Err(Error::InvalidArgument {
            name: "quad",
            value: quad.len().to_string(),
            reason: format!(
                "eigensolution was evaluated on {} nodes",
                solution.trace(0).len()
            ),
        });
    }
    Ok(())
}

/// Why the ascent loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    IterationCap,
    StepUnderflow,
    Stationary,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::IterationCap => write!(f, "iteration cap"),
            StopReason::StepUnderflow => write!(f, "step underflow"),
            StopReason::Stationary => write!(f, "stationary point"),
        }
    }
}

/// Per-iteration log entry.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    /// C_k at this iterate.
    pub cost: f64,
    /// Cluster size M.
    pub cluster: usize,
    /// Accepted step length (zero when the iterate is the last).
    pub step: f64,
    pub volume: f64,
    /// Cost window C_k ..= C_(k+M).
    pub window: Vec<f64>,
}

/// Final state of one ascent run.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub coefficients: HarmonicCoefficients,
    /// C_k of the best iterate.
    pub cost: f64,
    /// Cluster size at the best iterate.
    pub cluster: usize,
    /// All costs C_0..=C_kmax at the best iterate.
    pub costs: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub stop: StopReason,
    /// Collocation pre-images at the best iterate, for export or reuse.
    pub preimages: Vec<Vec4>,
}

/// Settings of the ascent loop.
#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    pub k: usize,
    /// Cluster threshold in cost units.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Largest cluster size the eigensolve window allows.
    pub cluster_cap: usize,
    pub evaluator: CostEvaluator,
}

impl OptimizeOptions {
    pub fn new(k: usize, evaluator: CostEvaluator) -> Self {
        Self { k, epsilon: DEFAULT_EPSILON, max_iterations: 100, cluster_cap: 8, evaluator }
    }
}

/// Max-min ascent with a backtracking line search on the cluster minimum.
///
/// Each iteration solves the eigenproblem, detects the cluster at the target
/// index, computes the cluster gradients and their max-min direction, and
/// backtracks from 0.1 |a| until the minimum cost over the cluster increases
/// by the Armijo fraction of the predicted gain. Accepted iterates are
/// rescaled to unit volume.
pub fn optimize(initial: &HarmonicCoefficients, opts: &OptimizeOptions) -> Result<OptimizerState> {
    if opts.k == 0 {
        return Err(Error::InvalidArgument {
            name: "k",
            value: "0".into(),
            reason: "sigma_0 = 0 cannot be optimized".into(),
        });
    }
    let d = initial.dimension().ambient() as f64;
    let kmax = opts.k + opts.cluster_cap + 1;

    // Work on the unit-volume representative throughout.
    let v0 = crate::geometry::volume(initial)?;
    let mut coeffs = initial.scaled(1.0 / v0.powf(1.0 / d))?;

    let mut eval = opts.evaluator.solve(&coeffs, kmax)?;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut best: Option<OptimizerState> = None;
    let mut stop = StopReason::IterationCap;

    for iteration in 0..opts.max_iterations {
        let cluster = cluster_size(&eval.costs, opts.k, opts.epsilon)?;
        record(&mut history, iteration, &eval, opts.k, cluster, 0.0);
        track_best(&mut best, &coeffs, &eval, opts.k, cluster);

        let gradients: Result<Vec<Vec<f64>>> = (opts.k..opts.k + cluster)
            .map(|j| cost_gradient(&coeffs, j, &eval.solution, &eval.quadrature))
            .collect();
        let direction = maxmin_direction(&gradients?)?;
        let Some(v) = direction.direction else {
            stop = StopReason::Stationary;
            break;
        };

        let anorm = coeffs.coefficients().iter().map(|a| a * a).sum::<f64>().sqrt();
        let current_min = window_min(&eval.costs, opts.k, cluster);
        let mut accepted = None;
        let mut t = 0.1 * anorm;
        for _ in 0..=MAX_HALVINGS {
            // Each trial evaluates the unit-volume rescaling of the stepped
            // domain, warm-started from the current collocation angles. Any
            // failure (degenerate domain, lost eigenvalues) rejects the step
            // like an insufficient increase does; the cost is scale
            // invariant, so the rescaled evaluation is the quantity the
            // Armijo bar compares.
            let target = current_min + ARMIJO_C * t * direction.value;
            if let Some((scaled, cand_eval)) =
                try_candidate(&coeffs, &v, t, opts, cluster, &eval.preimages, target, d)
            {
                accepted = Some((scaled, cand_eval, t));
                break;
            }
            t *= 0.5;
        }

        let Some((next_coeffs, next_eval, step)) = accepted else {
            stop = StopReason::StepUnderflow;
            break;
        };
        if let Some(rec) = history.last_mut() {
            rec.step = step;
        }
        coeffs = next_coeffs;
        eval = next_eval;
    }

    // The loop may end on a solve that was never recorded; consider it.
    if let Ok(cluster) = cluster_size(&eval.costs, opts.k, opts.epsilon) {
        track_best(&mut best, &coeffs, &eval, opts.k, cluster);
    }

    let mut state = best.expect("at least one iterate was evaluated");
    state.history = history;
    state.stop = stop;
    Ok(state)
}

fn window_min(costs: &[f64], k: usize, cluster: usize) -> f64 {
    costs[k..k + cluster].iter().copied().fold(f64::INFINITY, f64::min)
}

/// One line-search trial: cheap screen on the frozen collocation angles,
/// then the definitive warm evaluation of the unit-volume rescaling. Both
/// must raise the cluster minimum to `target`.
#[allow(clippy::too_many_arguments)]
fn try_candidate(
    coeffs: &HarmonicCoefficients,
    v: &[f64],
    t: f64,
    opts: &OptimizeOptions,
    cluster: usize,
    preimages: &[Vec4],
    target: f64,
    d: f64,
) -> Option<(HarmonicCoefficients, Evaluation)> {
    let kmax = opts.k + opts.cluster_cap + 1;
    let candidate = coeffs.perturbed(v, t).ok()?;
    let costs = opts
        .evaluator
        .costs_only(&candidate, opts.k + cluster - 1, preimages)
        .ok()?;
    if window_min(&costs, opts.k, cluster) < target {
        return None;
    }
    let vol = crate::geometry::volume(&candidate).ok()?;
    let scaled = candidate.scaled(1.0 / vol.powf(1.0 / d)).ok()?;
    let cand_eval = opts.evaluator.solve_warm(&scaled, kmax, preimages).ok()?;
    if window_min(&cand_eval.costs, opts.k, cluster) < target {
        return None;
    }
    Some((scaled, cand_eval))
}

fn record(
    history: &mut Vec<IterationRecord>,
    iteration: usize,
    eval: &Evaluation,
    k: usize,
    cluster: usize,
    step: f64,
) {
    history.push(IterationRecord {
        iteration,
        cost: eval.costs[k],
        cluster,
        step,
        volume: eval.volume,
        window: eval.costs[k..=(k + cluster).min(eval.costs.len() - 1)].to_vec(),
    });
}

fn track_best(
    best: &mut Option<OptimizerState>,
    coeffs: &HarmonicCoefficients,
    eval: &Evaluation,
    k: usize,
    cluster: usize,
) {
    let cost = eval.costs[k];
    if best.as_ref().is_none_or(|b| cost > b.cost) {
        *best = Some(OptimizerState {
            coefficients: coeffs.clone(),
            cost,
            cluster,
            costs: eval.costs.clone(),
            history: Vec::new(),
            stop: StopReason::IterationCap,
            preimages: eval.preimages.clone(),
        });
    }
}

/// Random initial domain for a restart: unit ball coefficients plus uniform
/// noise on the modes of degree 1..=4. Resamples (with fresh randomness) if
/// the noisy radius fails to stay positive.
pub fn noisy_ball(
    dimension: Dimension,
    degree: u32,
    amplitude: f64,
    seed: u64,
) -> Result<HarmonicCoefficients> {
    let ball = HarmonicCoefficients::ball(dimension, degree, 1.0)?;
    if amplitude == 0.0 {
        return Ok(ball);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..32 {
        let mut a = ball.coefficients().to_vec();
        for (idx, coeff) in a.iter_mut().enumerate() {
            let l = ball.table().indices()[idx].degree();
            if l >= 1 && l <= 4 {
                *coeff += rng.random_range(-amplitude..amplitude);
            }
        }
        let candidate = ball.with_coefficients(a)?;
        if crate::geometry::volume(&candidate).is_ok() {
            return Ok(candidate);
        }
    }
    Err(Error::InvalidArgument {
        name: "amplitude",
        value: amplitude.to_string(),
        reason: "could not draw a star-shaped initial domain".into(),
    })
}

/// Multi-start ascent: one run per restart with independent noise and
/// collocation seeds. Returns every run, best first.
pub fn optimize_multi(
    degree: u32,
    opts: &OptimizeOptions,
    restarts: usize,
    noise: f64,
    dimension: Dimension,
) -> Result<Vec<OptimizerState>> {
    let mut runs = Vec::with_capacity(restarts.max(1));
    for r in 0..restarts.max(1) {
        let mut opts_r = opts.clone();
        opts_r.evaluator.seed = opts.evaluator.seed.wrapping_add(r as u64);
        let initial = noisy_ball(dimension, degree, noise, opts_r.evaluator.seed)?;
        runs.push(optimize(&initial, &opts_r)?);
    }
    runs.sort_by(|a, b| b.cost.total_cmp(&a.cost));
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::BallOracle;
    use crate::qp::min_norm_point;

    fn ball_costs(dimension: Dimension, count: usize) -> Vec<f64> {
        // Unit-volume ball: C_j equals sigma_j directly.
        BallOracle::unit_volume(dimension).eigenvalues(count)
    }

    #[test]
    fn cluster_detection() {
        // Widely separated costs give a singleton cluster.
        let well_sep = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(cluster_size(&well_sep, 1, 0.01).unwrap(), 1);
        assert_eq!(cluster_size(&well_sep, 2, 0.01).unwrap(), 1);

        // 3D ball at k = 2: sigma_2 = sigma_3 exactly, sigma_4 = 2 sigma_1
        // sits outside the threshold.
        let costs = ball_costs(Dimension::Three, 10);
        assert_eq!(cluster_size(&costs, 2, 0.01).unwrap(), 2);
        assert_eq!(cluster_size(&costs, 1, 0.01).unwrap(), 3);
        assert_eq!(cluster_size(&costs, 4, 0.01).unwrap(), 5);

        // 4D ball at k = 1: the full l = 1 block of four.
        let costs4 = ball_costs(Dimension::Four, 8);
        assert_eq!(cluster_size(&costs4, 1, 0.01).unwrap(), 4);

        // A cluster running off the window is an error.
        assert!(matches!(
            cluster_size(&[0.0, 1.0, 1.001, 1.002], 1, 0.01),
            Err(Error::InsufficientEigenvalues { .. })
        ));
        assert!(matches!(
            cluster_size(&[0.0, 1.0], 1, 0.01),
            Err(Error::InsufficientEigenvalues { .. })
        ));
    }

    #[test]
    fn cost_is_scale_invariant_with_shared_preimages() {
        let table = crate::harmonics::BasisTable::new(Dimension::Three, 2);
        let mut a = vec![0.0; table.len()];
        a[0] = (4.0 * std::f64::consts::PI).sqrt();
        a[2] = 0.2;
        a[6] = -0.12;
        let base = HarmonicCoefficients::new(Dimension::Three, 2, a).unwrap();
        let mut ev = CostEvaluator::new(Dimension::Three, 220);
        ev.resolution = GridResolution::ThreeD { theta: 32, phi: 64 };
        let eval = ev.solve(&base, 5).unwrap();
        for t in [0.5, 1.7] {
            let scaled = base.scaled(t).unwrap();
            let costs = ev.costs_only(&scaled, 5, &eval.preimages).unwrap();
            for k in 1..=5 {
                let rel = (costs[k] - eval.costs[k]).abs() / eval.costs[k];
                assert!(rel < 1e-6, "t = {t}, k = {k}: {} vs {}", costs[k], eval.costs[k]);
            }
        }
    }

    #[test]
    fn ball_cost_matches_oracle() {
        let r3 = BallOracle::unit_volume(Dimension::Three).radius();
        let ball = HarmonicCoefficients::ball(Dimension::Three, 2, r3).unwrap();
        let mut ev = CostEvaluator::new(Dimension::Three, 260);
        ev.resolution = GridResolution::ThreeD { theta: 32, phi: 64 };
        // C_4 of any 3D ball is 2 (4 pi / 3)^(1/3) = 3.2240 (reported as the
        // sigma_4 optimum).
        let eval = ev.solve(&ball, 4).unwrap();
        assert!((eval.costs[4] - 3.223_983_908_032_939).abs() < 1e-5);
        assert!((eval.volume - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ball_is_maxmin_stationary_for_the_first_eigenvalue() {
        let r3 = BallOracle::unit_volume(Dimension::Three).radius();
        let ball = HarmonicCoefficients::ball(Dimension::Three, 3, r3).unwrap();
        let mut ev = CostEvaluator::new(Dimension::Three, 300);
        ev.resolution = GridResolution::ThreeD { theta: 32, phi: 64 };
        let eval = ev.solve(&ball, 6).unwrap();
        let cluster = cluster_size(&eval.costs, 1, 0.01).unwrap();
        assert_eq!(cluster, 3);
        let grads: Vec<Vec<f64>> = (1..4)
            .map(|j| cost_gradient(&ball, j, &eval.solution, &eval.quadrature).unwrap())
            .collect();
        // Individual gradients are far from zero...
        let gnorm = grads[0].iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(gnorm > 0.1, "|g| = {gnorm}");
        // ...but the hull of the cluster gradients reaches (numerically)
        // the origin: the ball maximizes sigma_1.
        let (point, _) = min_norm_point(&grads).unwrap();
        let pnorm = point.iter().map(|p| p * p).sum::<f64>().sqrt();
        assert!(pnorm < 1e-3, "min-norm point has norm {pnorm}");
    }

    #[test]
    fn gradient_matches_finite_differences_on_a_perturbed_ball() {
        // r = 1 + 0.2 S_1^1 + 0.1 S_2^0 has a simple sigma_1.
        let table = crate::harmonics::BasisTable::new(Dimension::Three, 2);
        let mut a = vec![0.0; table.len()];
        a[0] = (4.0 * std::f64::consts::PI).sqrt();
        a[3] = 0.2;
        a[6] = 0.1;
        let coeffs = HarmonicCoefficients::new(Dimension::Three, 2, a).unwrap();
        let mut ev = CostEvaluator::new(Dimension::Three, 240);
        ev.resolution = GridResolution::ThreeD { theta: 32, phi: 64 };

        let eval = ev.solve(&coeffs, 2).unwrap();
        let gap = eval.costs[2] - eval.costs[1];
        assert!(gap > 0.02, "sigma_1 must be simple, gap {gap}");
        let grad = cost_gradient(&coeffs, 1, &eval.solution, &eval.quadrature).unwrap();

        let h = 1e-5;
        let mut dir = vec![0.0; coeffs.len()];
        let mut worst: f64 = 0.0;
        for p in 0..coeffs.len() {
            dir.fill(0.0);
            dir[p] = 1.0;
            let cp = ev
                .costs_only(&coeffs.perturbed(&dir, h).unwrap(), 1, &eval.preimages)
                .unwrap()[1];
            let cm = ev
                .costs_only(&coeffs.perturbed(&dir, -h).unwrap(), 1, &eval.preimages)
                .unwrap()[1];
            let fd = (cp - cm) / (2.0 * h);
            worst = worst.max((fd - grad[p]).abs());
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(worst / gnorm < 1e-3, "max component error {worst}, |g| = {gnorm}");
    }

    #[test]
    fn cluster_shape_derivatives_sum_to_the_block_trace() {
        // Under a symmetric perturbation the sum of the cluster eigenvalue
        // derivatives equals the derivative of the block trace, which is a
        // smooth function even through the crossing.
        let r3 = BallOracle::unit_volume(Dimension::Three).radius();
        let ball = HarmonicCoefficients::ball(Dimension::Three, 2, r3).unwrap();
        let mut ev = CostEvaluator::new(Dimension::Three, 260);
        ev.resolution = GridResolution::ThreeD { theta: 32, phi: 64 };
        let eval = ev.solve(&ball, 4).unwrap();

        // Direction: the S_2^0 mode (index 6 at N = 2).
        let mut dir = vec![0.0; ball.len()];
        dir[6] = 1.0;

        let traced: f64 = (1..4)
            .map(|j| {
                let g = cost_gradient(&ball, j, &eval.solution, &eval.quadrature).unwrap();
                g[6]
            })
            .sum();

        let h = 1e-5;
        let sum_at = |t: f64| -> f64 {
            let c = ball.perturbed(&dir, t).unwrap();
            let costs = ev.costs_only(&c, 3, &eval.preimages).unwrap();
            costs[1] + costs[2] + costs[3]
        };
        let fd = (sum_at(h) - sum_at(-h)) / (2.0 * h);
        assert!(
            (traced - fd).abs() < 1e-3 * fd.abs().max(1.0),
            "trace rule {traced} vs finite difference {fd}"
        );
    }

    #[test]
    fn ascent_from_a_noisy_ball_is_monotone() {
        let initial = noisy_ball(Dimension::Three, 4, 0.15, 9).unwrap();
        let mut ev = CostEvaluator::new(Dimension::Three, 200);
        ev.resolution = GridResolution::ThreeD { theta: 24, phi: 48 };
        ev.warm_riesz_iters = 40;
        let mut opts = OptimizeOptions::new(2, ev);
        opts.max_iterations = 8;
        let state = optimize(&initial, &opts).unwrap();

        assert!(!state.history.is_empty());
        // The cluster minimum never decreases across accepted steps.
        let mins: Vec<f64> = state
            .history
            .iter()
            .map(|r| r.window.iter().take(r.cluster).copied().fold(f64::INFINITY, f64::min))
            .collect();
        for pair in mins.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12, "cluster min decreased: {pair:?}");
        }
        // Unit volume is restored after every accepted step.
        for rec in &state.history {
            assert!((rec.volume - 1.0).abs() < 1e-8, "volume {} at {}", rec.volume, rec.iteration);
        }
        // The best cost is at least the starting cost.
        assert!(state.cost >= state.history[0].cost - 1e-12);
    }
}
