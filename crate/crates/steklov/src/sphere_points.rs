//! Near-uniform collocation points on the boundary, and the offset source
//! points for the fundamental-solution ansatz.
//!
//! A quasi-uniform seed on the unit sphere is mapped through the boundary
//! parametrization and then improved by descending the Riesz s-energy of the
//! mapped points. The descent variables are the spherical pre-images: each
//! step moves the boundary points along the negative Euclidean energy
//! gradient and retracts radially back onto the surface, so the refined
//! points stay exactly on the boundary.

use crate::error::{Error, Result};
use crate::geometry::{self, HarmonicCoefficients};
use crate::harmonics::Dimension;
use crate::vecmath::{self, Vec4};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use std::f64::consts::PI;

/// Iteration cap for a cold-start refinement.
pub const DEFAULT_RIESZ_ITERS: usize = 500;
/// Sufficient-decrease constant for the backtracking line search.
const ARMIJO_C: f64 = 1e-4;
/// Stop when one accepted step decreases the energy by less than this
/// relative amount.
const REL_DECREASE_STOP: f64 = 1e-8;
/// Pairs closer than this are treated as coincident.
const COINCIDENT_TOL: f64 = 1e-12;

/// Riesz s-energy, the sum of 1/|x_i - x_j|^s over unordered pairs.
pub fn riesz_energy(points: &[Vec4], s: f64) -> Result<f64> {
    check_exponent(s)?;
    if points.len() < 2 {
        return Err(Error::InvalidArgument {
            name: "points",
            value: points.len().to_string(),
            reason: "energy needs at least 2 points".into(),
        });
    }
    let mut energy = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = vecmath::sub(&points[i], &points[j]);
            let r2 = vecmath::dot(&d, &d);
            if r2.sqrt() < COINCIDENT_TOL {
                return Err(Error::CoincidentPoints {
                    i,
                    j,
                    dist: r2.sqrt(),
                });
            }
            energy += r2.powf(-0.5 * s);
        }
    }
    Ok(energy)
}

/// Smallest pairwise distance in a configuration.
pub fn min_pairwise_distance(points: &[Vec4]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = vecmath::sub(&points[i], &points[j]);
            best = best.min(vecmath::dot(&d, &d));
        }
    }
    best.sqrt()
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "s",
            value: s.to_string(),
            reason: "Riesz exponent must be positive".into(),
        });
    }
    Ok(())
}

/// Energy, effective gradient, squared gradient norm, max gradient norm,
/// min distance. The Euclidean gradient is
/// grad[i] = -s sum_j (x_i - x_j)/|x_i - x_j|^{s+2};
/// its component along the radial direction of each point is removed, since
/// the radial retraction annihilates radial motion. What remains is the
/// gradient with respect to the actual degrees of freedom.
fn energy_and_gradient(
    points: &[Vec4],
    s: f64,
    grad: &mut [Vec4],
) -> Result<(f64, f64, f64, f64)> {
    grad.fill(vecmath::ZERO);
    let mut energy = 0.0;
    let mut min_r2 = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = vecmath::sub(&points[i], &points[j]);
            let r2 = vecmath::dot(&d, &d);
            if r2.sqrt() < COINCIDENT_TOL {
                return Err(Error::CoincidentPoints {
                    i,
                    j,
                    dist: r2.sqrt(),
                });
            }
            min_r2 = min_r2.min(r2);
            let inv_rs = r2.powf(-0.5 * s);
            energy += inv_rs;
            let f = -s * inv_rs / r2;
            vecmath::axpy(&mut grad[i], f, &d);
            vecmath::axpy(&mut grad[j], -f, &d);
        }
    }
    let mut gsq = 0.0;
    let mut gmax: f64 = 0.0;
    for (g, x) in grad.iter_mut().zip(points) {
        let xn2 = vecmath::dot(x, x);
        if xn2 > 0.0 {
            let radial = vecmath::dot(g, x) / xn2;
            vecmath::axpy(g, -radial, x);
        }
        let n2 = vecmath::dot(g, g);
        gsq += n2;
        gmax = gmax.max(n2);
    }
    Ok((energy, gsq, gmax.sqrt(), min_r2.sqrt()))
}

/// Quasi-uniform seed points on S^{d-1}, rotated by a seeded random
/// orthogonal matrix so distinct seeds give distinct configurations.
/// 3D uses the spherical Fibonacci spiral; 4D uses a Kronecker sequence
/// pushed through the area-preserving angle transforms.
pub fn quasi_uniform_seed(dimension: Dimension, count: usize, seed: u64) -> Vec<Vec4> {
    let mut pts = Vec::with_capacity(count);
    match dimension {
        Dimension::Three => {
            let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
            for i in 0..count {
                let z = 1.0 - (2 * i + 1) as f64 / count as f64;
                let st = (1.0 - z * z).max(0.0).sqrt();
                let phi = 2.0 * PI * ((i as f64 * (golden - 1.0)).fract());
                pts.push([st * phi.cos(), st * phi.sin(), z, 0.0]);
            }
        }
        Dimension::Four => {
            // generators from the plastic constant, the 3D analogue of the
            // golden-ratio spiral
            let c = plastic_constant();
            let alphas = [1.0 / c, 1.0 / (c * c), 1.0 / (c * c * c)];
            for i in 0..count {
                let u: Vec<f64> = alphas
                    .iter()
                    .map(|a| (0.5 + (i + 1) as f64 * a).fract())
                    .collect();
                let beta = invert_beta_area(u[0]);
                let theta = (1.0 - 2.0 * u[1]).clamp(-1.0, 1.0).acos();
                let phi = 2.0 * PI * u[2];
                let (sb, cb) = beta.sin_cos();
                let (st, ct) = theta.sin_cos();
                pts.push([sb * st * phi.cos(), sb * st * phi.sin(), sb * ct, cb]);
            }
        }
    }
    let q = random_rotation(dimension, seed);
    pts.iter()
        .map(|p| {
            let mut out = vecmath::ZERO;
            for (row, o) in q.iter().zip(out.iter_mut()) {
                *o = vecmath::dot(row, p);
            }
            out
        })
        .collect()
}

/// Real root of x^3 = x + 1.
fn plastic_constant() -> f64 {
    let mut x: f64 = 1.3;
    for _ in 0..60 {
        x -= (x * x * x - x - 1.0) / (3.0 * x * x - 1.0);
    }
    x
}

/// Solve (beta - sin(beta) cos(beta)) / pi = u on [0, pi] by bisection.
/// The left side is the normalized area of the spherical cap cut at beta,
/// so uniform u gives the sin^2-weighted colatitude distribution.
fn invert_beta_area(u: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, PI);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f = (mid - mid.sin() * mid.cos()) / PI;
        if f < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Seeded random orthogonal d x d matrix (rows), identity on unused slots.
fn random_rotation(dimension: Dimension, seed: u64) -> [Vec4; 4] {
    let d = dimension.ambient();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = || -> f64 {
        // Box-Muller from two uniforms in (0, 1]
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    };
    loop {
        let mut q = [vecmath::ZERO; 4];
        let mut ok = true;
        for i in 0..d {
            let mut v = vecmath::ZERO;
            for slot in v.iter_mut().take(d) {
                *slot = gaussian();
            }
            for j in 0..i {
                let proj = vecmath::dot(&v, &q[j]);
                vecmath::axpy(&mut v, -proj, &q[j]);
            }
            let n = vecmath::norm(&v);
            if n < 1e-8 {
                ok = false;
                break;
            }
            q[i] = vecmath::scale(&v, 1.0 / n);
        }
        if ok {
            if d == 3 {
                q[3] = [0.0, 0.0, 0.0, 1.0];
            }
            return q;
        }
    }
}

/// Outcome of an energy descent: the refined configuration, its energy, and
/// how many steps were accepted. Hitting the iteration cap is not an error;
/// the best configuration found is returned.
#[derive(Clone, Debug)]
pub struct RieszOutcome {
    pub points: Vec<Vec4>,
    pub energy: f64,
    pub iterations: usize,
}

/// Minimize the Riesz s-energy of points constrained to the unit sphere by
/// projected gradient descent. Monotone: the returned energy never exceeds
/// the initial energy.
pub fn minimize_riesz(
    dimension: Dimension,
    initial: &[Vec4],
    s: f64,
    iters: usize,
) -> Result<RieszOutcome> {
    let mut pre: Vec<Vec4> = initial
        .iter()
        .map(|p| {
            let n = vecmath::norm(p);
            if n < 1e-300 {
                return Err(Error::InvalidArgument {
                    name: "initial",
                    value: "0".into(),
                    reason: "initial points must be nonzero".into(),
                });
            }
            Ok(vecmath::scale(p, 1.0 / n))
        })
        .collect::<Result<_>>()?;
    let _ = dimension;
    let (points, energy, iterations) = descend(|u| Ok(*u), &mut pre, s, iters)?;
    Ok(RieszOutcome {
        points,
        energy,
        iterations,
    })
}

/// Projected gradient descent on the mapped points, with the spherical
/// pre-images as variables and radial retraction back to the surface.
/// `map` sends a unit pre-image to the surface point.
fn descend<M: FnMut(&Vec4) -> Result<Vec4>>(
    mut map: M,
    pre: &mut Vec<Vec4>,
    s: f64,
    iters: usize,
) -> Result<(Vec<Vec4>, f64, usize)> {
    check_exponent(s)?;
    let m = pre.len();
    let mut points = Vec::with_capacity(m);
    for u in pre.iter() {
        points.push(map(u)?);
    }
    let mut grad = vec![vecmath::ZERO; m];
    let (mut energy, mut gsq, mut gmax, mut dmin) = energy_and_gradient(&points, s, &mut grad)?;
    let initial_energy = energy;
    let mut iterations = 0;

    let mut prev: Option<(Vec<Vec4>, Vec<Vec4>)> = None;
    'outer: for _ in 0..iters {
        if gmax <= 0.0 {
            break;
        }
        // spectral (Barzilai-Borwein) initial step when history exists,
        // otherwise a fraction of the minimum spacing; always capped so no
        // point moves further than the current spacing in one trial
        let cap = dmin / gmax;
        let mut h = 0.3 * cap;
        if let Some((px, pg)) = &prev {
            let mut sxx = 0.0;
            let mut sxg = 0.0;
            for i in 0..m {
                let dx = vecmath::sub(&points[i], &px[i]);
                let dg = vecmath::sub(&grad[i], &pg[i]);
                sxx += vecmath::dot(&dx, &dx);
                sxg += vecmath::dot(&dx, &dg);
            }
            if sxg > 0.0 && sxx > 0.0 {
                h = (sxx / sxg).min(cap);
            }
        }
        let mut accepted = None;
        for _ in 0..30 {
            let trial = try_step(&mut map, pre, &points, &grad, h);
            if let Ok((tpre, tpts)) = trial {
                if let Ok(te) = riesz_energy(&tpts, s) {
                    if te <= energy - ARMIJO_C * h * gsq {
                        accepted = Some((tpre, tpts, te));
                        break;
                    }
                }
            }
            h *= 0.5;
        }
        let Some((tpre, tpts, te)) = accepted else {
            break 'outer;
        };
        let rel = (energy - te) / energy.abs().max(f64::MIN_POSITIVE);
        prev = Some((std::mem::take(&mut points), grad.clone()));
        *pre = tpre;
        points = tpts;
        iterations += 1;
        let refreshed = energy_and_gradient(&points, s, &mut grad)?;
        energy = refreshed.0;
        gsq = refreshed.1;
        gmax = refreshed.2;
        dmin = refreshed.3;
        debug_assert!((te - energy).abs() <= 1e-9 * energy.abs());
        if rel < REL_DECREASE_STOP {
            break;
        }
    }
    debug_assert!(energy <= initial_energy * (1.0 + 1e-12));
    Ok((points, energy, iterations))
}

fn try_step<M: FnMut(&Vec4) -> Result<Vec4>>(
    map: &mut M,
    pre: &[Vec4],
    points: &[Vec4],
    grad: &[Vec4],
    h: f64,
) -> Result<(Vec<Vec4>, Vec<Vec4>)> {
    let mut tpre = Vec::with_capacity(pre.len());
    let mut tpts = Vec::with_capacity(pre.len());
    for i in 0..pre.len() {
        let mut z = points[i];
        vecmath::axpy(&mut z, -h, &grad[i]);
        let n = vecmath::norm(&z);
        if n < 1e-300 {
            return Err(Error::SingularPoint { norm: n });
        }
        let u = vecmath::scale(&z, 1.0 / n);
        tpts.push(map(&u)?);
        tpre.push(u);
    }
    Ok((tpre, tpts))
}

/// Collocation points on the boundary with their outward normals and the
/// source points offset along the normals.
#[derive(Clone, Debug)]
pub struct CollocationSet {
    dimension: Dimension,
    points: Vec<Vec4>,
    normals: Vec<Vec4>,
    sources: Vec<Vec4>,
    preimages: Vec<Vec4>,
    delta: f64,
    energy: f64,
}

impl CollocationSet {
    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec4] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec4] {
        &self.normals
    }

    pub fn sources(&self) -> &[Vec4] {
        &self.sources
    }

    /// Unit-sphere pre-images of the points, reusable as a warm start when
    /// the domain changes slightly.
    pub fn preimages(&self) -> &[Vec4] {
        &self.preimages
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Riesz energy of the boundary points after refinement.
    pub fn energy(&self) -> f64 {
        self.energy
    }
}

/// Build collocation points for a domain from a fresh quasi-uniform seed,
/// refine them by Riesz descent, and offset the sources.
pub fn build_collocation(
    coeffs: &HarmonicCoefficients,
    count: usize,
    s: f64,
    delta: f64,
    seed: u64,
) -> Result<CollocationSet> {
    let pre = quasi_uniform_seed(coeffs.dimension(), count, seed);
    refine_collocation(coeffs, &pre, s, delta, DEFAULT_RIESZ_ITERS)
}

/// Refine a given set of spherical pre-images on the domain boundary and
/// assemble the collocation set. Used directly for warm starts.
pub fn refine_collocation(
    coeffs: &HarmonicCoefficients,
    preimages: &[Vec4],
    s: f64,
    delta: f64,
    iters: usize,
) -> Result<CollocationSet> {
    if preimages.len() < 4 {
        return Err(Error::InvalidArgument {
            name: "count",
            value: preimages.len().to_string(),
            reason: "need at least 4 collocation points".into(),
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "delta",
            value: delta.to_string(),
            reason: "source offset must be positive".into(),
        });
    }
    let dim = coeffs.dimension();
    let mut pre = preimages.to_vec();
    let table = coeffs.table();
    let mut ws = table.make_workspace();
    let mut vals = vec![0.0; table.len()];
    let mut mapper = |u: &Vec4| -> Result<Vec4> {
        let angles = geometry::angles_of_unit(dim, u);
        table.values_into(&angles[..dim.angle_count()], &mut ws, &mut vals)?;
        let r: f64 = coeffs
            .coefficients()
            .iter()
            .zip(&vals)
            .map(|(a, v)| a * v)
            .sum();
        if !(r > 0.0) {
            return Err(Error::InvalidDomain {
                radius: r,
                angles: angles[..dim.angle_count()].to_vec(),
            });
        }
        Ok(vecmath::scale(u, r))
    };
    let (points, energy, _) = descend(&mut mapper, &mut pre, s, iters)?;

    let mut normals = Vec::with_capacity(points.len());
    let mut sources = Vec::with_capacity(points.len());
    for (i, u) in pre.iter().enumerate() {
        let angles = geometry::angles_of_unit(dim, u);
        let frame = geometry::surface_frame(coeffs, &angles[..dim.angle_count()])?;
        let mut y = frame.point;
        vecmath::axpy(&mut y, delta, &frame.normal);
        // outside check in the radial sense: |y| must exceed the boundary
        // radius in the direction of y
        let ry = vecmath::norm(&y);
        let y_angles = geometry::angles_of_unit(dim, &vecmath::scale(&y, 1.0 / ry));
        let boundary = coeffs.radius_at(&y_angles[..dim.angle_count()])?;
        if ry <= boundary {
            return Err(Error::SourceInsideDomain {
                index: i,
                radius: ry,
                boundary,
            });
        }
        normals.push(frame.normal);
        sources.push(y);
    }
    Ok(CollocationSet {
        dimension: dim,
        points,
        normals,
        sources,
        preimages: pre,
        delta,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::BasisIndex;

    fn octahedron() -> Vec<Vec4> {
        vec![
            [1.0, 0.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
        ]
    }

    #[test]
    fn energy_known_values() {
        let anti = vec![[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, -1.0, 0.0]];
        assert_eq!(riesz_energy(&anti, 1.0).unwrap(), 0.5);
        // 12 edge pairs at sqrt(2) and 3 axis pairs at 2
        let e = riesz_energy(&octahedron(), 1.0).unwrap();
        assert!((e - (12.0 / 2.0_f64.sqrt() + 1.5)).abs() < 1e-13);
        assert!((e - 9.98528137423857).abs() < 1e-10);
    }

    #[test]
    fn energy_matches_brute_force() {
        let pts = quasi_uniform_seed(Dimension::Three, 40, 7);
        let e = riesz_energy(&pts, 3.0).unwrap();
        let mut brute = 0.0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i < j {
                    brute += vecmath::norm(&vecmath::sub(&pts[i], &pts[j])).powi(-3);
                }
            }
        }
        assert!((e - brute).abs() < 1e-12 * brute);
    }

    #[test]
    fn energy_rejects_coincident_points() {
        let pts = vec![[1.0, 0.0, 0.0, 0.0], [1.0, 1e-13, 0.0, 0.0]];
        assert!(matches!(
            riesz_energy(&pts, 1.0),
            Err(Error::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn two_points_become_antipodal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut initial = Vec::new();
        for _ in 0..2 {
            let v = [
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                0.0,
            ];
            initial.push(vecmath::scale(&v, 1.0 / vecmath::norm(&v)));
        }
        let out = minimize_riesz(Dimension::Three, &initial, 1.0, 5000).unwrap();
        assert!((out.energy - 0.5).abs() < 1e-6, "E = {}", out.energy);
    }

    #[test]
    fn six_points_reach_octahedral_energy() {
        let initial = quasi_uniform_seed(Dimension::Three, 6, 11);
        let out = minimize_riesz(Dimension::Three, &initial, 1.0, 5000).unwrap();
        assert!(
            (out.energy - 9.98528137423857).abs() < 1e-4,
            "E = {}",
            out.energy
        );
    }

    #[test]
    fn four_points_form_tetrahedron() {
        let initial = quasi_uniform_seed(Dimension::Three, 4, 5);
        let out = minimize_riesz(Dimension::Three, &initial, 3.0, 5000).unwrap();
        let mut dists = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                dists.push(vecmath::norm(&vecmath::sub(
                    &out.points[i],
                    &out.points[j],
                )));
            }
        }
        let (lo, hi) = dists
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(l, h), &d| (l.min(d), h.max(d)));
        assert!(hi - lo < 1e-5, "distances spread {lo}..{hi}");
    }

    #[test]
    fn descent_is_monotone() {
        let initial = quasi_uniform_seed(Dimension::Four, 50, 9);
        let e0 = riesz_energy(&initial, 3.0).unwrap();
        let out = minimize_riesz(Dimension::Four, &initial, 3.0, 100).unwrap();
        assert!(out.energy <= e0);
    }

    #[test]
    fn collocation_on_unit_sphere() {
        let c = HarmonicCoefficients::ball(Dimension::Three, 2, 1.0).unwrap();
        let set = build_collocation(&c, 100, 3.0, 0.2, 42).unwrap();
        assert_eq!(set.len(), 100);
        for (y, x) in set.sources().iter().zip(set.points()) {
            assert!((vecmath::norm(y) - 1.2).abs() < 1e-10);
            let off = vecmath::sub(y, x);
            assert!((vecmath::norm(&off) - 0.2).abs() < 1e-12);
        }
        // mesh ratio of nearest-neighbor distances stays moderate
        let nn: Vec<f64> = (0..set.len())
            .map(|i| {
                (0..set.len())
                    .filter(|&j| j != i)
                    .map(|j| vecmath::norm(&vecmath::sub(&set.points()[i], &set.points()[j])))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let (lo, hi) = nn
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(l, h), &d| (l.min(d), h.max(d)));
        assert!(hi / lo < 2.5, "mesh ratio {}", hi / lo);
    }

    #[test]
    fn refinement_spreads_points_on_demo_domain() {
        let mut c = HarmonicCoefficients::ball(Dimension::Three, 2, 1.0).unwrap();
        let mut a = c.coefficients().to_vec();
        a[c.table().position(BasisIndex::three(2, 0)).unwrap()] = 0.4;
        c = c.with_coefficients(a).unwrap();
        let seed_pre = quasi_uniform_seed(Dimension::Three, 200, 1);
        let seed_pts: Vec<Vec4> = seed_pre
            .iter()
            .map(|u| {
                let ang = geometry::angles_of_unit(Dimension::Three, u);
                geometry::boundary_map(&c, &ang[..2]).unwrap()
            })
            .collect();
        let set = refine_collocation(&c, &seed_pre, 3.0, 0.2, DEFAULT_RIESZ_ITERS).unwrap();
        assert!(
            min_pairwise_distance(set.points()) > min_pairwise_distance(&seed_pts),
            "refinement should increase the minimum spacing"
        );
        let e_seed = riesz_energy(&seed_pts, 3.0).unwrap();
        assert!(set.energy() < e_seed);
    }

    #[test]
    fn collocation_is_deterministic() {
        let c = HarmonicCoefficients::ball(Dimension::Four, 1, 1.0).unwrap();
        let a = build_collocation(&c, 60, 3.0, 0.2, 7).unwrap();
        let b = build_collocation(&c, 60, 3.0, 0.2, 7).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert_eq!(p, q);
        }
        for (p, q) in a.sources().iter().zip(b.sources()) {
            assert_eq!(p, q);
        }
    }

    #[test]
    fn seeds_depend_on_seed_value() {
        let a = quasi_uniform_seed(Dimension::Three, 20, 1);
        let b = quasi_uniform_seed(Dimension::Three, 20, 2);
        assert!(vecmath::norm(&vecmath::sub(&a[0], &b[0])) > 1e-6);
        for p in a.iter().chain(&b) {
            assert!((vecmath::norm(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let c = HarmonicCoefficients::ball(Dimension::Three, 1, 1.0).unwrap();
        assert!(build_collocation(&c, 3, 3.0, 0.2, 0).is_err());
        assert!(build_collocation(&c, 10, 3.0, -0.1, 0).is_err());
        assert!(build_collocation(&c, 10, 0.0, 0.2, 0).is_err());
    }
}
