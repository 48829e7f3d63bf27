//! Forward solver for the Steklov eigenvalue problem by the method of
//! fundamental solutions.
//!
//! A trial function w(x) = sum_j beta_j Phi(x - y_j) is harmonic inside the
//! domain for any coefficients because the source points y_j lie outside.
//! Collocating the boundary condition dw/dn = sigma w at the points x_i turns
//! the eigenvalue problem into the generalized matrix pencil A X = Lambda B X
//! with A_ij = n_i . grad Phi(x_i - y_j) and B_ij = Phi(x_i - y_j).

use dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::ComputeEigenvectors;
use faer::linalg::gevd::{gevd_real, gevd_scratch};
use faer::diag::Diag;
use faer::{Mat, Par};

use crate::error::{Error, Result};
use crate::geometry::BoundaryQuadrature;
use crate::harmonics::Dimension;
use crate::sphere_points::CollocationSet;
use crate::vecmath::{axpy, dot, norm, scale, sub, Vec4, ZERO};

/// Distances below this are treated as a singularity of the kernel.
pub const SINGULARITY_TOL: f64 = 1e-14;

/// Relative imaginary-part tolerance for keeping an eigenvalue of the
/// nonsymmetric pencil. Nearly multiple real eigenvalues can emerge from the
/// QZ sweep as a conjugate pair whose imaginary part is far above rounding
/// (it grows like the square root of the backward error), while genuinely
/// spurious complex modes sit at Im/Re of order one, so the threshold lives
/// in the wide gap between the two populations. Kept pairs contribute both
/// members at their shared real part.
pub const IMAG_FILTER_TOL: f64 = 1e-3;

/// Eigenvalues below this are discarded as spurious. Genuine Steklov
/// eigenvalues are nonnegative; sigma_0 = 0 may round slightly negative.
pub const SIGMA_FLOOR: f64 = -1e-4;

/// Fundamental solution of the Laplacian, Phi(x) = 1/(d (d-2) alpha(d) |x|^(d-2))
/// with alpha(d) the unit ball volume. Reduces to 1/(4 pi |x|) in 3D and
/// 1/(4 pi^2 |x|^2) in 4D.
pub fn fundamental_solution(dimension: Dimension, x: &Vec4) -> Result<f64> {
    let r2 = dot(x, x);
    check_separation(r2)?;
    Ok(phi_from_r2(dimension, r2))
}

/// Gradient of the fundamental solution, -x / (d alpha(d) |x|^d).
pub fn fundamental_gradient(dimension: Dimension, x: &Vec4) -> Result<Vec4> {
    let r2 = dot(x, x);
    check_separation(r2)?;
    let phi = phi_from_r2(dimension, r2);
    Ok(scale(x, grad_factor(dimension, phi, r2)))
}

fn check_separation(r2: f64) -> Result<()> {
    if !(r2 > SINGULARITY_TOL * SINGULARITY_TOL) {
        return Err(Error::SingularPoint { norm: r2.max(0.0).sqrt() });
    }
    Ok(())
}

#[inline]
fn phi_from_r2(dimension: Dimension, r2: f64) -> f64 {
    match dimension {
        Dimension::Three => 1.0 / (4.0 * std::f64::consts::PI * r2.sqrt()),
        Dimension::Four => 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI * r2),
    }
}

/// grad Phi(x) = grad_factor * x; the factor is -(d-2) Phi / |x|^2.
#[inline]
fn grad_factor(dimension: Dimension, phi: f64, r2: f64) -> f64 {
    let dm2 = (dimension.ambient() - 2) as f64;
    -dm2 * phi / r2
}

/// Collocated MFS matrices for one domain.
pub struct MfsSystem {
    dimension: Dimension,
    a: Mat<f64>,
    b: Mat<f64>,
    colloc: CollocationSet,
}

impl MfsSystem {
    /// Fill A and B from a collocation set. The system is square: one source
    /// per collocation point.
    pub fn assemble(colloc: CollocationSet) -> Result<Self> {
        let dimension = colloc.dimension();
        let m = colloc.len();
        let points = colloc.points();
        let normals = colloc.normals();
        let sources = colloc.sources();
        let mut a = Mat::<f64>::zeros(m, m);
        let mut b = Mat::<f64>::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                let diff = sub(&points[i], &sources[j]);
                let r2 = dot(&diff, &diff);
                check_separation(r2)?;
                let phi = phi_from_r2(dimension, r2);
                a[(i, j)] = grad_factor(dimension, phi, r2) * dot(&normals[i], &diff);
                b[(i, j)] = phi;
            }
        }
        Ok(Self { dimension, a, b, colloc })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// Number of collocation points (= number of sources).
    pub fn size(&self) -> usize {
        self.colloc.len()
    }

    pub fn matrix_a(&self) -> &Mat<f64> {
        &self.a
    }

    pub fn matrix_b(&self) -> &Mat<f64> {
        &self.b
    }

    pub fn collocation(&self) -> &CollocationSet {
        &self.colloc
    }

    /// Mean distance of the collocation points from the origin, the length
    /// scale used by the spurious-eigenvalue cap.
    pub fn mean_radius(&self) -> f64 {
        let pts = self.colloc.points();
        pts.iter().map(norm).sum::<f64>() / pts.len() as f64
    }
}

/// Upper cutoff for retained eigenvalues. Spurious modes of the
/// ill-conditioned pencil land far above the physical range, which scales
/// like k / R by the Weyl law for the Steklov spectrum.
fn sigma_cap(kmax: usize, mean_radius: f64) -> f64 {
    10.0 * (kmax + 1) as f64 / mean_radius
}

/// Raw output of the real QZ factorization: eigenvalue i is
/// (alpha_re[i] + i alpha_im[i]) / beta[i]. Complex pairs occupy adjacent
/// slots j, j+1; the columns j and j+1 of `u` then hold the real and
/// imaginary parts of the eigenvector of slot j.
struct PencilEigen {
    alpha_re: Vec<f64>,
    alpha_im: Vec<f64>,
    beta: Vec<f64>,
    u: Option<Mat<f64>>,
}

fn run_gevd(a: &Mat<f64>, b: &Mat<f64>, with_vectors: bool) -> Result<PencilEigen> {
    let n = a.nrows();
    // The QZ reduction destroys its inputs, so it works on copies.
    let mut qa = a.clone();
    let mut qb = b.clone();
    let mut s_re = Diag::<f64>::zeros(n);
    let mut s_im = Diag::<f64>::zeros(n);
    let mut s_b = Diag::<f64>::zeros(n);
    let mut u = if with_vectors { Some(Mat::<f64>::zeros(n, n)) } else { None };
    let compute = if with_vectors { ComputeEigenvectors::Yes } else { ComputeEigenvectors::No };
    let par = Par::Seq;
    let mut mem = MemBuffer::new(gevd_scratch::<f64>(
        n,
        ComputeEigenvectors::No,
        compute,
        par,
        Default::default(),
    ));
    gevd_real(
        qa.as_mut(),
        qb.as_mut(),
        s_re.as_mut(),
        s_im.as_mut(),
        s_b.as_mut(),
        None,
        u.as_mut().map(|m| m.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::EigensolveFailed(format!("QZ iteration failed: {e:?}")))?;
    let collect = |d: &Diag<f64>| d.column_vector().iter().copied().collect::<Vec<f64>>();
    Ok(PencilEigen {
        alpha_re: collect(&s_re),
        alpha_im: collect(&s_im),
        beta: collect(&s_b),
        u,
    })
}

/// Relative residual |(A - sigma B) c + eta B p| / ((|A| + |sigma||B|) |c|)
/// in the infinity norm over Frobenius matrix norms. For a real eigenvalue
/// eta = 0 and p is ignored; for a member of a conjugate pair, c and p are
/// the real and imaginary parts of the pair's eigenvector (in either order)
/// and the eta term is the real or imaginary component of the complex
/// identity (A - (sigma + i eta) B)(c_re + i c_im) = 0.
fn pencil_residual(a: &Mat<f64>, b: &Mat<f64>, sigma: f64, c: &[f64], eta: f64, p: &[f64]) -> f64 {
    let n = a.nrows();
    let mut r = vec![0.0_f64; n];
    for j in 0..n {
        let cj = c[j];
        let pj = if eta != 0.0 { p[j] } else { 0.0 };
        if cj == 0.0 && pj == 0.0 {
            continue;
        }
        for i in 0..n {
            r[i] += (a[(i, j)] - sigma * b[(i, j)]) * cj + eta * b[(i, j)] * pj;
        }
    }
    let rmax = r.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let cmax = c.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let scale = a.norm_l2() + sigma.abs() * b.norm_l2();
    rmax / (scale * cmax + f64::MIN_POSITIVE)
}

/// Keep near-real eigenvalues in the physical window and sort them by value.
/// Returns (sigma, original slot index) pairs.
/// One retained eigenvalue: its value, its slot in the QZ output, and the
/// signed imaginary part of that slot (zero for a real eigenvalue). Both
/// members of a kept conjugate pair appear, each at the shared real part.
#[derive(Clone, Copy)]
struct Kept {
    sigma: f64,
    slot: usize,
    eta: f64,
}

fn filter_sorted(raw: &PencilEigen, cap: f64) -> Vec<Kept> {
    let mut kept = Vec::new();
    for j in 0..raw.beta.len() {
        let re = raw.alpha_re[j] / raw.beta[j];
        let im = raw.alpha_im[j] / raw.beta[j];
        if !re.is_finite() || !im.is_finite() {
            continue;
        }
        if im.abs() > IMAG_FILTER_TOL * re.abs().max(1.0) {
            continue;
        }
        if re < SIGMA_FLOOR || re > cap {
            continue;
        }
        kept.push(Kept { sigma: re, slot: j, eta: im });
    }
    kept.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    kept
}

/// Eigenvalues sigma_0..sigma_kmax without eigenvector extraction. Skipping
/// the Schur-vector accumulation roughly halves the QZ cost, which matters
/// for line-search candidates.
pub fn eigenvalues_only(system: &MfsSystem, kmax: usize) -> Result<Vec<f64>> {
    // Schur vectors are requested even though they go unused: the
    // vectorless QZ path returns wrong eigenvalues on these ill-conditioned
    // pencils (checked by qz_modes_agree_on_filtered_eigenvalues), so the
    // saving here is only the skipped eigenfunction evaluation.
    let raw = run_gevd(&system.a, &system.b, true)?;
    let kept = filter_sorted(&raw, sigma_cap(kmax, system.mean_radius()));
    if kept.len() < kmax + 1 {
        return Err(Error::InsufficientEigenvalues { got: kept.len(), needed: kmax + 1 });
    }
    Ok(kept[..=kmax].iter().map(|k| k.sigma).collect())
}

/// Eigenvalues with boundary traces and gradients of the eigenfunctions.
pub struct EigenSolution {
    dimension: Dimension,
    sigma: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
    traces: Vec<Vec<f64>>,
    gradients: Vec<Vec<Vec4>>,
    sources: Vec<Vec4>,
    cond_estimate: f64,
    normalized: bool,
}

/// Full forward solve: QZ factorization of (A, B), eigenvalue filtering, and
/// evaluation of each retained eigenfunction on the quadrature grid, scaled
/// to unit boundary L2 norm.
pub fn solve_eigen(
    system: &MfsSystem,
    kmax: usize,
    quad: &BoundaryQuadrature,
) -> Result<EigenSolution> {
    if kmax == 0 {
        return Err(Error::InvalidArgument {
            name: "kmax",
            value: "0".into(),
            reason: "need at least the first nontrivial eigenvalue".into(),
        });
    }
    if quad.dimension() != system.dimension {
        return Err(Error::InvalidArgument {
            name: "quad",
            value: quad.dimension().to_string(),
            reason: format!("dimension mismatch with the {} system", system.dimension),
        });
    }
    let raw = run_gevd(&system.a, &system.b, true)?;
    let kept = filter_sorted(&raw, sigma_cap(kmax, system.mean_radius()));
    if kept.len() < kmax + 1 {
        return Err(Error::InsufficientEigenvalues { got: kept.len(), needed: kmax + 1 });
    }
    let kept = &kept[..=kmax];

    // Lower bound on cond(B): Q^T B Z is triangular with the beta values on
    // its diagonal and shares the singular values of B.
    let bmax = raw.beta.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
    let bmin = raw.beta.iter().fold(f64::INFINITY, |m, b| m.min(b.abs()));
    let cond_estimate = if bmin > 0.0 { bmax / bmin } else { f64::INFINITY };

    let u = raw.u.as_ref().expect("vectors requested");
    let m = system.size();
    // For a conjugate pair in slots (j, j+1) the columns j and j+1 hold the
    // real and imaginary parts of the pair's eigenvector; both span the
    // invariant subspace of the underlying nearly multiple real eigenvalue,
    // so each member of the pair takes its own column.
    let coefficients: Vec<Vec<f64>> =
        kept.iter().map(|k| (0..m).map(|i| u[(i, k.slot)]).collect()).collect();

    // Backward-stability guard: a valid QZ eigenpair has a residual at
    // rounding level relative to the matrix norms. Anything larger means the
    // factorization went wrong and the pair cannot be trusted.
    for (k, c) in kept.iter().zip(&coefficients) {
        let partner: Vec<f64>;
        let p: &[f64] = if k.eta != 0.0 {
            let pj = if k.eta > 0.0 { k.slot + 1 } else { k.slot - 1 };
            partner = (0..m).map(|i| u[(i, pj)]).collect();
            &partner
        } else {
            &[]
        };
        let rel = pencil_residual(&system.a, &system.b, k.sigma, c, k.eta, p);
        if !(rel < 1e-8) {
            return Err(Error::EigensolveFailed(format!(
                "eigenpair for sigma = {:.6e} has relative residual {rel:.3e}",
                k.sigma
            )));
        }
    }

    let sources = system.colloc.sources().to_vec();
    let nodes = quad.points();
    let sw = quad.surface_weights();
    let nq = nodes.len();
    let kk = kept.len();
    let mut traces = vec![vec![0.0_f64; nq]; kk];
    let mut gradients = vec![vec![ZERO; nq]; kk];
    for q in 0..nq {
        for (j, y) in sources.iter().enumerate() {
            let diff = sub(&nodes[q], y);
            let r2 = dot(&diff, &diff);
            check_separation(r2)?;
            let phi = phi_from_r2(system.dimension, r2);
            let gf = grad_factor(system.dimension, phi, r2);
            for k in 0..kk {
                let c = coefficients[k][j];
                traces[k][q] += c * phi;
                axpy(&mut gradients[k][q], c * gf, &diff);
            }
        }
    }

    let mut coefficients = coefficients;
    for k in 0..kk {
        let mass: f64 = (0..nq).map(|q| sw[q] * traces[k][q] * traces[k][q]).sum();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::EigensolveFailed(format!(
                "eigenfunction {k} has degenerate boundary norm {mass:e}"
            )));
        }
        let s = 1.0 / mass.sqrt();
        for c in &mut coefficients[k] {
            *c *= s;
        }
        for w in &mut traces[k] {
            *w *= s;
        }
        for g in &mut gradients[k] {
            *g = scale(g, s);
        }
    }

    Ok(EigenSolution {
        dimension: system.dimension,
        sigma: kept.iter().map(|k| k.sigma).collect(),
        coefficients,
        traces,
        gradients,
        sources,
        cond_estimate,
        normalized: true,
    })
}

impl EigenSolution {
    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// Number of retained eigenpairs (kmax + 1, including sigma_0).
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Sorted eigenvalues starting at sigma_0 (which is zero up to the
    /// collocation error).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.sigma
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.sigma[k]
    }

    /// MFS coefficients beta_j of eigenfunction k.
    pub fn coefficients(&self, k: usize) -> &[f64] {
        &self.coefficients[k]
    }

    /// Boundary trace of eigenfunction k at the quadrature nodes.
    pub fn trace(&self, k: usize) -> &[f64] {
        &self.traces[k]
    }

    /// Full spatial gradient of eigenfunction k at the quadrature nodes.
    pub fn gradient(&self, k: usize) -> &[Vec4] {
        &self.gradients[k]
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    /// Lower bound on the condition number of B obtained from the spread of
    /// the QZ beta values. Large values are expected and harmless; they are
    /// reported for logging only.
    pub fn conditioning(&self) -> f64 {
        self.cond_estimate
    }

    /// Evaluate eigenfunction k anywhere (it extends harmonically to all of
    /// space minus the source points).
    pub fn eigenfunction_at(&self, k: usize, x: &Vec4) -> Result<f64> {
        let mut w = 0.0;
        for (c, y) in self.coefficients[k].iter().zip(&self.sources) {
            w += c * fundamental_solution(self.dimension, &sub(x, y))?;
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_quadrature, GridResolution, HarmonicCoefficients};
    use crate::sphere_points::build_collocation;
    use std::f64::consts::PI;

    #[test]
    fn qz_modes_agree_on_filtered_eigenvalues() {
        // The Schur-vector toggle changes the sweep internals but must not
        // change which eigenvalues survive the filter, or line-search
        // screening would disagree with the definitive evaluation.

        // Small non-symmetric pencil with known eigenvalues 1..=5 via an
        // integer-shear similarity, B = I.
        {
            let n = 5;
            let d = Mat::<f64>::from_fn(n, n, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
            let s = Mat::<f64>::from_fn(n, n, |i, j| {
                if i == j {
                    1.0
                } else if j == i + 1 {
                    0.5
                } else {
                    0.0
                }
            });
            let sinv = Mat::<f64>::from_fn(n, n, |i, j| {
                if j >= i {
                    (-0.5_f64).powi((j - i) as i32)
                } else {
                    0.0
                }
            });
            let a = &s * &d * &sinv;
            let b = Mat::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 });
            let raw = run_gevd(&a, &b, false).unwrap();
            let mut evs: Vec<f64> = (0..n).map(|j| raw.alpha_re[j] / raw.beta[j]).collect();
            evs.sort_by(f64::total_cmp);
            for (j, e) in evs.iter().enumerate() {
                assert!(
                    (e - (j + 1) as f64).abs() < 1e-10,
                    "no-vectors gevd eigenvalues {evs:?}"
                );
            }
        }

        let table = crate::harmonics::BasisTable::new(Dimension::Three, 2);
        let mut a = vec![0.0; table.len()];
        a[0] = (4.0 * PI).sqrt();
        a[table.position(crate::harmonics::BasisIndex::three(1, 1)).unwrap()] = 0.2;
        a[table.position(crate::harmonics::BasisIndex::three(2, 0)).unwrap()] = 0.1;
        let coeffs = HarmonicCoefficients::new(Dimension::Three, 2, a).unwrap();
        let colloc = build_collocation(&coeffs, 150, 3.0, 0.2, 5).unwrap();
        let sys = MfsSystem::assemble(colloc).unwrap();

        let quad = build_quadrature(&coeffs, GridResolution::ThreeD { theta: 24, phi: 48 })
            .unwrap();
        let screened = eigenvalues_only(&sys, 5).unwrap();
        let definitive = solve_eigen(&sys, 5, &quad).unwrap();
        assert_eq!(screened.len(), 6);
        for (k, s) in screened.iter().enumerate() {
            assert_eq!(*s, definitive.eigenvalue(k), "index {k}");
        }
    }

    #[test]
    fn fundamental_solution_reference_values() {
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let v3 = fundamental_solution(Dimension::Three, &e1).unwrap();
        assert!((v3 - 1.0 / (4.0 * PI)).abs() < 1e-16);
        let v4 = fundamental_solution(Dimension::Four, &e1).unwrap();
        assert!((v4 - 1.0 / (4.0 * PI * PI)).abs() < 1e-16);
        let v3b = fundamental_solution(Dimension::Three, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        assert!((v3b - 1.0 / (8.0 * PI)).abs() < 1e-16);
        assert!(matches!(
            fundamental_solution(Dimension::Three, &[1e-15, 0.0, 0.0, 0.0]),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn fundamental_gradient_matches_finite_differences() {
        let g = fundamental_gradient(Dimension::Three, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((g[0] + 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(g[1] == 0.0 && g[2] == 0.0);
        let g4 = fundamental_gradient(Dimension::Four, &[0.0, 0.0, 0.0, 2.0]).unwrap();
        assert!((g4[3] + 2.0 / (2.0 * PI * PI * 16.0)).abs() < 1e-15);

        let h = 1e-6;
        for (dim, x) in [
            (Dimension::Three, [0.3, -0.7, 0.51, 0.0]),
            (Dimension::Four, [0.3, -0.7, 0.51, 0.22]),
        ] {
            let g = fundamental_gradient(dim, &x).unwrap();
            for c in 0..dim.ambient() {
                let mut xp = x;
                let mut xm = x;
                xp[c] += h;
                xm[c] -= h;
                let fd = (fundamental_solution(dim, &xp).unwrap()
                    - fundamental_solution(dim, &xm).unwrap())
                    / (2.0 * h);
                assert!((fd - g[c]).abs() < 1e-8, "dim {dim} component {c}");
            }
            // Homogeneity: the radial derivative is -(d-2) Phi / |x|.
            let r = norm(&x);
            let radial = dot(&g, &x) / r;
            let expect = -((dim.ambient() - 2) as f64)
                * fundamental_solution(dim, &x).unwrap()
                / r;
            assert!((radial - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn gevd_recovers_diagonal_pencil() {
        // Hand-solvable pencil: A = diag(2, 6), B = diag(1, 2) has
        // eigenvalues 2 and 3 with coordinate eigenvectors.
        let a = Mat::<f64>::from_fn(2, 2, |i, j| if i == j { [2.0, 6.0][i] } else { 0.0 });
        let b = Mat::<f64>::from_fn(2, 2, |i, j| if i == j { [1.0, 2.0][i] } else { 0.0 });
        let raw = run_gevd(&a, &b, true).unwrap();
        let kept = filter_sorted(&raw, 100.0);
        assert_eq!(kept.len(), 2);
        assert!((kept[0].sigma - 2.0).abs() < 1e-12);
        assert!((kept[1].sigma - 3.0).abs() < 1e-12);
        let u = raw.u.as_ref().unwrap();
        let j2 = kept[0].slot;
        let j3 = kept[1].slot;
        // lambda = 2 pairs with e1, lambda = 3 with e2, up to scale.
        assert!(u[(1, j2)].abs() < 1e-12 * u[(0, j2)].abs());
        assert!(u[(0, j3)].abs() < 1e-12 * u[(1, j3)].abs());

        // A rotation against the identity has eigenvalues +-i; the
        // near-real filter must reject both.
        let rot = Mat::<f64>::from_fn(2, 2, |i, j| [[0.0, -1.0], [1.0, 0.0]][i][j]);
        let id = Mat::<f64>::identity(2, 2);
        let raw = run_gevd(&rot, &id, false).unwrap();
        assert!(filter_sorted(&raw, 100.0).is_empty());
    }

    #[test]
    fn assembly_matches_hand_kernel_on_sphere() {
        // Unit sphere, delta = 0.2: the diagonal entries have |x - y| = 0.2
        // exactly, so B_ii = 1/(0.8 pi) and A_ii = 0.2/(4 pi 0.008).
        let ball = HarmonicCoefficients::ball(Dimension::Three, 1, 1.0).unwrap();
        let colloc = build_collocation(&ball, 20, 3.0, 0.2, 7).unwrap();
        let sys = MfsSystem::assemble(colloc).unwrap();
        for i in 0..sys.size() {
            assert!((sys.matrix_b()[(i, i)] - 1.0 / (0.8 * PI)).abs() < 1e-12);
            assert!((sys.matrix_a()[(i, i)] - 0.2 / (4.0 * PI * 0.008)).abs() < 1e-10);
        }
        // Off-diagonal spot check from the definitions.
        let x = sys.collocation().points()[0];
        let n = sys.collocation().normals()[0];
        let y = sys.collocation().sources()[3];
        let diff = sub(&x, &y);
        let phi = fundamental_solution(Dimension::Three, &diff).unwrap();
        let grad = fundamental_gradient(Dimension::Three, &diff).unwrap();
        assert!((sys.matrix_b()[(0, 3)] - phi).abs() < 1e-15);
        assert!((sys.matrix_a()[(0, 3)] - dot(&n, &grad)).abs() < 1e-15);
        for j in 0..sys.size() {
            for i in 0..sys.size() {
                assert!(sys.matrix_a()[(i, j)].is_finite());
                assert!(sys.matrix_b()[(i, j)].is_finite());
            }
        }
    }

    fn unit_volume_ball(dimension: Dimension) -> HarmonicCoefficients {
        let r = (1.0 / dimension.unit_ball_volume()).powf(1.0 / dimension.ambient() as f64);
        HarmonicCoefficients::ball(dimension, 1, r).unwrap()
    }

    #[test]
    fn ball_spectrum_three_dimensional() {
        let ball = unit_volume_ball(Dimension::Three);
        let r = (3.0 / (4.0 * PI)).powf(1.0 / 3.0);
        let colloc = build_collocation(&ball, 300, 3.0, 0.2, 11).unwrap();
        let sys = MfsSystem::assemble(colloc).unwrap();
        let quad = build_quadrature(&ball, GridResolution::ThreeD { theta: 32, phi: 64 }).unwrap();
        let sol = solve_eigen(&sys, 8, &quad).unwrap();

        // sigma_0 = 0, then l/r with multiplicity 2l+1: three 1/r, five 2/r.
        assert!(sol.eigenvalue(0).abs() < 1e-6);
        for k in 1..=3 {
            assert!((sol.eigenvalue(k) - 1.0 / r).abs() < 1e-5, "sigma_{k} = {}", sol.eigenvalue(k));
        }
        for k in 4..=8 {
            assert!((sol.eigenvalue(k) - 2.0 / r).abs() < 1e-5, "sigma_{k} = {}", sol.eigenvalue(k));
        }

        // Unit boundary mass after normalization.
        let sw = quad.surface_weights();
        for k in 0..sol.len() {
            let mass: f64 = sol.trace(k).iter().zip(sw).map(|(w, s)| w * w * s).sum();
            assert!((mass - 1.0).abs() < 1e-8);
        }

        // The fast path sees the same spectrum.
        let vals = eigenvalues_only(&sys, 8).unwrap();
        for k in 0..=8 {
            assert!((vals[k] - sol.eigenvalue(k)).abs() < 1e-10);
        }

        // Interior harmonicity probe: five-point finite-difference Laplacian.
        let p = [0.3 * r, -0.1 * r, 0.2 * r, 0.0];
        let h = 1e-3;
        let mut lap = -6.0 * sol.eigenfunction_at(1, &p).unwrap();
        for c in 0..3 {
            let mut pp = p;
            let mut pm = p;
            pp[c] += h;
            pm[c] -= h;
            lap += sol.eigenfunction_at(1, &pp).unwrap() + sol.eigenfunction_at(1, &pm).unwrap();
        }
        assert!((lap / (h * h)).abs() < 1e-4);

        assert!(sol.conditioning() > 1e3, "MFS basis should be ill-conditioned");
    }

    #[test]
    fn ball_spectrum_four_dimensional() {
        let ball = unit_volume_ball(Dimension::Four);
        let r = (2.0 / (PI * PI)).powf(0.25);
        let colloc = build_collocation(&ball, 400, 3.0, 0.2, 3).unwrap();
        let sys = MfsSystem::assemble(colloc).unwrap();
        let quad =
            build_quadrature(&ball, GridResolution::FourD { beta: 16, theta: 16, phi: 32 })
                .unwrap();
        let sol = solve_eigen(&sys, 5, &quad).unwrap();
        assert!(sol.eigenvalue(0).abs() < 1e-5);
        // Multiplicity (l+1)^2: four eigenvalues at 1/r, then 2/r.
        for k in 1..=4 {
            assert!(
                (sol.eigenvalue(k) - 1.0 / r).abs() < 1e-3,
                "sigma_{k} = {} vs {}",
                sol.eigenvalue(k),
                1.0 / r
            );
        }
        assert!((sol.eigenvalue(5) - 2.0 / r).abs() < 5e-3);
    }

    #[test]
    fn eigenvalues_scale_inversely_with_the_domain() {
        let table = crate::harmonics::BasisTable::new(Dimension::Three, 2);
        let mut a = vec![0.0; table.len()];
        a[0] = (4.0 * PI).sqrt();
        a[3] = 0.15;
        a[5] = -0.1;
        let base = HarmonicCoefficients::new(Dimension::Three, 2, a).unwrap();
        let scaled = base.scaled(1.5).unwrap();

        let colloc = build_collocation(&base, 220, 3.0, 0.2, 5).unwrap();
        let pre = colloc.preimages().to_vec();
        let sys = MfsSystem::assemble(colloc).unwrap();
        let vals = eigenvalues_only(&sys, 4).unwrap();

        let colloc2 =
            crate::sphere_points::refine_collocation(&scaled, &pre, 3.0, 0.2, 120).unwrap();
        let sys2 = MfsSystem::assemble(colloc2).unwrap();
        let vals2 = eigenvalues_only(&sys2, 4).unwrap();

        for k in 1..=4 {
            let rel = (vals2[k] - vals[k] / 1.5).abs() / vals[k].abs();
            assert!(rel < 1e-6, "sigma_{k}: {} vs {}", vals2[k], vals[k] / 1.5);
        }
    }
}
