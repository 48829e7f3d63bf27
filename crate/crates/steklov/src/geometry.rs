//! Star-shaped domains written as a graph over the unit sphere.
//!
//! The boundary is x(xi) = r(xi) xi with the radius expanded in the real
//! harmonic basis, r = sum_p a_p S_p. This module evaluates the boundary map,
//! tangents, outward normals, mean curvature, volume, and builds the
//! tensor-product surface quadrature every boundary integral runs on.
//!
//! Two weight systems coexist on the same nodes: `sphere_weights` integrate
//! against the round measure d(xi) on S^{d-1} (used for volume and its
//! gradient), `surface_weights` integrate against the surface measure ds on
//! the deformed boundary (used for eigenfunction integrals).

use crate::error::{Error, Result};
use crate::harmonics::{BasisIndex, BasisTable, BasisWorkspace, Dimension};
use crate::quadrature::{gauss_chebyshev2, gauss_legendre};
use crate::vecmath::{self, Vec4};

use std::f64::consts::PI;

/// Coefficient vector of the radius expansion r = sum_p a_p S_p over the
/// basis enumeration of `BasisTable`. Positivity of r is not enforced here;
/// the grid-building operations reject domains where any evaluated radius
/// is nonpositive.
#[derive(Clone, Debug)]
pub struct HarmonicCoefficients {
    table: BasisTable,
    a: Vec<f64>,
}

impl HarmonicCoefficients {
    pub fn new(dimension: Dimension, degree: u32, a: Vec<f64>) -> Result<Self> {
        let table = BasisTable::new(dimension, degree);
        if a.len() != table.len() {
            return Err(Error::CoefficientLength {
                got: a.len(),
                expected: table.len(),
            });
        }
        if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "coefficients",
                value: bad.to_string(),
                reason: "all coefficients must be finite".into(),
            });
        }
        Ok(HarmonicCoefficients { table, a })
    }

    /// The ball of the given radius: only the constant mode is set, to
    /// radius * sqrt(|S^{d-1}|) since the constant harmonic is 1/sqrt(|S^{d-1}|).
    pub fn ball(dimension: Dimension, degree: u32, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "radius",
                value: radius.to_string(),
                reason: "ball radius must be positive".into(),
            });
        }
        let table = BasisTable::new(dimension, degree);
        let mut a = vec![0.0; table.len()];
        a[0] = radius * dimension.unit_sphere_area().sqrt();
        Ok(HarmonicCoefficients { table, a })
    }

    pub fn dimension(&self) -> Dimension {
        self.table.dimension()
    }

    pub fn degree(&self) -> u32 {
        self.table.degree()
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn table(&self) -> &BasisTable {
        &self.table
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn coefficient(&self, idx: BasisIndex) -> Option<f64> {
        self.table.position(idx).map(|p| self.a[p])
    }

    /// Same basis, new coefficient vector.
    pub fn with_coefficients(&self, a: Vec<f64>) -> Result<Self> {
        HarmonicCoefficients::new(self.dimension(), self.degree(), a)
    }

    /// Coefficients a + t * dir, for line searches and finite differences.
    pub fn perturbed(&self, dir: &[f64], t: f64) -> Result<Self> {
        if dir.len() != self.a.len() {
            return Err(Error::CoefficientLength {
                got: dir.len(),
                expected: self.a.len(),
            });
        }
        let a = self
            .a
            .iter()
            .zip(dir)
            .map(|(a, d)| a + t * d)
            .collect();
        self.with_coefficients(a)
    }

    /// The dilated domain t * Omega.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "t",
                value: t.to_string(),
                reason: "scale factor must be positive".into(),
            });
        }
        self.with_coefficients(self.a.iter().map(|a| t * a).collect())
    }

    /// Radius r(xi) at one parameter point. Errors if nonpositive: the
    /// coefficients then describe no star-shaped domain.
    pub fn radius_at(&self, angles: &[f64]) -> Result<f64> {
        let mut ws = self.table.make_workspace();
        let mut vals = vec![0.0; self.table.len()];
        self.table.values_into(angles, &mut ws, &mut vals)?;
        let r = dot_slices(&self.a, &vals);
        if !(r > 0.0) {
            return Err(Error::InvalidDomain {
                radius: r,
                angles: angles.to_vec(),
            });
        }
        Ok(r)
    }
}

fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Tensor grid sizes. Polar angles use Gauss rules in their cosines, the
/// azimuth uses the trapezoid rule, so nodes never sit on the poles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridResolution {
    ThreeD { theta: usize, phi: usize },
    FourD { beta: usize, theta: usize, phi: usize },
}

impl GridResolution {
    pub fn default_for(dimension: Dimension) -> Self {
        match dimension {
            Dimension::Three => GridResolution::ThreeD {
                theta: 64,
                phi: 128,
            },
            Dimension::Four => GridResolution::FourD {
                beta: 32,
                theta: 32,
                phi: 64,
            },
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            GridResolution::ThreeD { .. } => Dimension::Three,
            GridResolution::FourD { .. } => Dimension::Four,
        }
    }

    pub fn node_count(self) -> usize {
        match self {
            GridResolution::ThreeD { theta, phi } => theta * phi,
            GridResolution::FourD { beta, theta, phi } => beta * theta * phi,
        }
    }

    /// Twice the resolution in every angle, for convergence checks.
    pub fn doubled(self) -> Self {
        match self {
            GridResolution::ThreeD { theta, phi } => GridResolution::ThreeD {
                theta: 2 * theta,
                phi: 2 * phi,
            },
            GridResolution::FourD { beta, theta, phi } => GridResolution::FourD {
                beta: 2 * beta,
                theta: 2 * theta,
                phi: 2 * phi,
            },
        }
    }

    fn validate(self) -> Result<()> {
        let min = match self {
            GridResolution::ThreeD { theta, phi } => theta.min(phi),
            GridResolution::FourD { beta, theta, phi } => beta.min(theta).min(phi),
        };
        if min < 4 {
            return Err(Error::InvalidArgument {
                name: "resolution",
                value: format!("{self:?}"),
                reason: "every grid direction needs at least 4 nodes".into(),
            });
        }
        Ok(())
    }
}

/// Quadrature nodes and weights for the round measure on S^{d-1}.
/// `sin_factors` holds the Jacobian sin(theta) or sin^2(beta) sin(theta)
/// already folded into `weights`, so that parameter-measure densities can be
/// recovered by division.
#[derive(Clone, Debug)]
pub struct SphereRule {
    dimension: Dimension,
    angles: Vec<[f64; 3]>,
    weights: Vec<f64>,
    sin_factors: Vec<f64>,
}

impl SphereRule {
    pub fn new(resolution: GridResolution) -> Result<Self> {
        resolution.validate()?;
        let dimension = resolution.dimension();
        let mut angles = Vec::with_capacity(resolution.node_count());
        let mut weights = Vec::with_capacity(resolution.node_count());
        let mut sin_factors = Vec::with_capacity(resolution.node_count());
        match resolution {
            GridResolution::ThreeD { theta, phi } => {
                let (xs, wx) = gauss_legendre(theta);
                let wp = 2.0 * PI / phi as f64;
                for (x, wt) in xs.iter().zip(&wx) {
                    let th = x.acos();
                    let st = (1.0 - x * x).max(0.0).sqrt();
                    for j in 0..phi {
                        angles.push([th, wp * j as f64, 0.0]);
                        weights.push(wt * wp);
                        sin_factors.push(st);
                    }
                }
            }
            GridResolution::FourD { beta, theta, phi } => {
                let (xb, wb) = gauss_chebyshev2(beta);
                let (xt, wt) = gauss_legendre(theta);
                let wp = 2.0 * PI / phi as f64;
                for (b, wbi) in xb.iter().zip(&wb) {
                    let be = b.acos();
                    let sb2 = (1.0 - b * b).max(0.0);
                    for (x, wti) in xt.iter().zip(&wt) {
                        let th = x.acos();
                        let st = (1.0 - x * x).max(0.0).sqrt();
                        for j in 0..phi {
                            angles.push([be, th, wp * j as f64]);
                            weights.push(wbi * wti * wp);
                            sin_factors.push(sb2 * st);
                        }
                    }
                }
            }
        }
        Ok(SphereRule {
            dimension,
            angles,
            weights,
            sin_factors,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[[f64; 3]] {
        &self.angles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn angle_slice<'a>(&self, node: &'a [f64; 3]) -> &'a [f64] {
        &node[..self.dimension.angle_count()]
    }
}

/// First-order data of the boundary at one parameter point.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceFrame {
    pub point: Vec4,
    /// Radial unit direction x-hat.
    pub radial: Vec4,
    /// Outward unit normal.
    pub normal: Vec4,
    /// Tangent vectors dx/d(angle), in the angle order of the parametrization.
    pub tangents: [Vec4; 3],
    /// Norm of the tangent cross product: ds = area_element d(angles).
    pub area_element: f64,
    pub radius: f64,
}

/// Boundary point x = r(xi) xi. Errors if the evaluated radius is nonpositive.
pub fn boundary_map(coeffs: &HarmonicCoefficients, angles: &[f64]) -> Result<Vec4> {
    let table = coeffs.table();
    let mut ws = table.make_workspace();
    let mut vals = vec![0.0; table.len()];
    table.values_into(angles, &mut ws, &mut vals)?;
    let r = dot_slices(coeffs.coefficients(), &vals);
    if !(r > 0.0) {
        return Err(Error::InvalidDomain {
            radius: r,
            angles: angles.to_vec(),
        });
    }
    let (u, _, _) = sphere_jet(coeffs.dimension(), angles);
    Ok(vecmath::scale(&u, r))
}

/// Boundary frame with tangents and outward normal at one parameter point.
pub fn surface_frame(coeffs: &HarmonicCoefficients, angles: &[f64]) -> Result<SurfaceFrame> {
    let mut eval = SurfaceEval::new(coeffs.table());
    let (frame, _) = eval.frame(coeffs, angles, false)?;
    Ok(frame)
}

/// Mean curvature as the sum of the d-1 principal curvatures, positive for
/// a sphere with outward normal (2/R in 3D, 3/R in 4D).
pub fn mean_curvature(coeffs: &HarmonicCoefficients, angles: &[f64]) -> Result<f64> {
    let mut eval = SurfaceEval::new(coeffs.table());
    let (_, h) = eval.frame(coeffs, angles, true)?;
    Ok(h.expect("curvature requested"))
}

/// Volume enclosed by the boundary, (1/d) * integral of r^d over S^{d-1},
/// on the default grid for the dimension.
pub fn volume(coeffs: &HarmonicCoefficients) -> Result<f64> {
    let rule = SphereRule::new(GridResolution::default_for(coeffs.dimension()))?;
    volume_on(coeffs, &rule)
}

/// Volume on a caller-provided rule (shared across optimizer iterations).
pub fn volume_on(coeffs: &HarmonicCoefficients, rule: &SphereRule) -> Result<f64> {
    check_rule(coeffs, rule)?;
    let table = coeffs.table();
    let d = coeffs.dimension().ambient() as i32;
    let mut ws = table.make_workspace();
    let mut vals = vec![0.0; table.len()];
    let mut acc = 0.0;
    for (node, w) in rule.angles.iter().zip(&rule.weights) {
        table.values_into(rule.angle_slice(node), &mut ws, &mut vals)?;
        let r = dot_slices(coeffs.coefficients(), &vals);
        if !(r > 0.0) {
            return Err(Error::InvalidDomain {
                radius: r,
                angles: rule.angle_slice(node).to_vec(),
            });
        }
        acc += w * r.powi(d);
    }
    Ok(acc / d as f64)
}

/// Gradient of volume in the coefficients: component p is the flux of the
/// radial deformation field S_p x-hat through the boundary, which reduces to
/// the integral of r^{d-1} S_p over S^{d-1}.
pub fn volume_gradient(coeffs: &HarmonicCoefficients) -> Result<Vec<f64>> {
    let rule = SphereRule::new(GridResolution::default_for(coeffs.dimension()))?;
    volume_gradient_on(coeffs, &rule)
}

pub fn volume_gradient_on(coeffs: &HarmonicCoefficients, rule: &SphereRule) -> Result<Vec<f64>> {
    check_rule(coeffs, rule)?;
    let table = coeffs.table();
    let d = coeffs.dimension().ambient() as i32;
    let mut ws = table.make_workspace();
    let mut vals = vec![0.0; table.len()];
    let mut grad = vec![0.0; table.len()];
    for (node, w) in rule.angles.iter().zip(&rule.weights) {
        table.values_into(rule.angle_slice(node), &mut ws, &mut vals)?;
        let r = dot_slices(coeffs.coefficients(), &vals);
        if !(r > 0.0) {
            return Err(Error::InvalidDomain {
                radius: r,
                angles: rule.angle_slice(node).to_vec(),
            });
        }
        let f = w * r.powi(d - 1);
        for (g, v) in grad.iter_mut().zip(&vals) {
            *g += f * v;
        }
    }
    Ok(grad)
}

fn check_rule(coeffs: &HarmonicCoefficients, rule: &SphereRule) -> Result<()> {
    if coeffs.dimension() != rule.dimension {
        return Err(Error::InvalidArgument {
            name: "rule",
            value: rule.dimension.to_string(),
            reason: format!("rule dimension must match coefficients ({})", coeffs.dimension()),
        });
    }
    Ok(())
}

/// Structured surface quadrature: nodes, geometry data, and both weight
/// systems, precomputed once per domain.
#[derive(Clone, Debug)]
pub struct BoundaryQuadrature {
    dimension: Dimension,
    resolution: GridResolution,
    angles: Vec<[f64; 3]>,
    points: Vec<Vec4>,
    normals: Vec<Vec4>,
    radial: Vec<Vec4>,
    radii: Vec<f64>,
    surface_weights: Vec<f64>,
    sphere_weights: Vec<f64>,
    curvatures: Vec<f64>,
}

/// Build the boundary quadrature for a domain: evaluates the surface frame
/// and mean curvature at every tensor node. Errors if the radius is
/// nonpositive anywhere or an area element degenerates.
pub fn build_quadrature(
    coeffs: &HarmonicCoefficients,
    resolution: GridResolution,
) -> Result<BoundaryQuadrature> {
    if resolution.dimension() != coeffs.dimension() {
        return Err(Error::InvalidArgument {
            name: "resolution",
            value: format!("{resolution:?}"),
            reason: format!("grid dimension must match coefficients ({})", coeffs.dimension()),
        });
    }
    let rule = SphereRule::new(resolution)?;
    let n = rule.len();
    let mut q = BoundaryQuadrature {
        dimension: coeffs.dimension(),
        resolution,
        angles: rule.angles.clone(),
        points: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
        radial: Vec::with_capacity(n),
        radii: Vec::with_capacity(n),
        surface_weights: Vec::with_capacity(n),
        sphere_weights: rule.weights.clone(),
        curvatures: Vec::with_capacity(n),
    };
    let mut eval = SurfaceEval::new(coeffs.table());
    for (i, node) in rule.angles.iter().enumerate() {
        let (frame, h) = eval.frame(coeffs, rule.angle_slice(node), true)?;
        if frame.area_element < 1e-14 {
            return Err(Error::DegenerateSurface {
                element: frame.area_element,
                node: i,
            });
        }
        // ds = (|cross| / sin factors) * round-measure weight
        q.surface_weights
            .push(frame.area_element / rule.sin_factors[i] * rule.weights[i]);
        q.points.push(frame.point);
        q.normals.push(frame.normal);
        q.radial.push(frame.radial);
        q.radii.push(frame.radius);
        q.curvatures.push(h.expect("curvature requested"));
    }
    Ok(q)
}

impl BoundaryQuadrature {
    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn resolution(&self) -> GridResolution {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parameter angles per node; 3D uses the first two slots.
    pub fn angles(&self) -> &[[f64; 3]] {
        &self.angles
    }

    pub fn points(&self) -> &[Vec4] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec4] {
        &self.normals
    }

    /// Radial unit directions x-hat per node.
    pub fn radial_directions(&self) -> &[Vec4] {
        &self.radial
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Weights for the surface measure ds on the boundary.
    pub fn surface_weights(&self) -> &[f64] {
        &self.surface_weights
    }

    /// Weights for the round measure on the parameter sphere S^{d-1}.
    pub fn sphere_weights(&self) -> &[f64] {
        &self.sphere_weights
    }

    /// Mean curvature per node.
    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn surface_area(&self) -> f64 {
        self.surface_weights.iter().sum()
    }

    /// Accumulate out[p] = sum over nodes of factor[i] * S_p(angles_i).
    /// The caller folds whichever weights it wants into `factor`.
    pub fn basis_integral(
        &self,
        table: &BasisTable,
        factor: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        if factor.len() != self.len() {
            return Err(Error::InvalidArgument {
                name: "factor",
                value: factor.len().to_string(),
                reason: format!("expected one factor per node ({})", self.len()),
            });
        }
        if out.len() != table.len() {
            return Err(Error::CoefficientLength {
                got: out.len(),
                expected: table.len(),
            });
        }
        let na = self.dimension.angle_count();
        let mut ws = table.make_workspace();
        let mut vals = vec![0.0; table.len()];
        out.fill(0.0);
        for (node, &f) in self.angles.iter().zip(factor) {
            if f == 0.0 {
                continue;
            }
            table.values_into(&node[..na], &mut ws, &mut vals)?;
            for (o, v) in out.iter_mut().zip(&vals) {
                *o += f * v;
            }
        }
        Ok(())
    }
}

/// Unit sphere point and its first and second angle derivatives.
/// Derivative slots follow the angle order; hessian packing matches the
/// basis tables (upper triangle 00, 01, 02, 11, 12, 22).
fn sphere_jet(dimension: Dimension, angles: &[f64]) -> (Vec4, [Vec4; 3], [Vec4; 6]) {
    match dimension {
        Dimension::Three => {
            let (st, ct) = angles[0].sin_cos();
            let (sp, cp) = angles[1].sin_cos();
            let u = [st * cp, st * sp, ct, 0.0];
            let du = [
                [ct * cp, ct * sp, -st, 0.0],
                [-st * sp, st * cp, 0.0, 0.0],
                vecmath::ZERO,
            ];
            let ddu = [
                vecmath::scale(&u, -1.0),
                [-ct * sp, ct * cp, 0.0, 0.0],
                vecmath::ZERO,
                [-st * cp, -st * sp, 0.0, 0.0],
                vecmath::ZERO,
                vecmath::ZERO,
            ];
            (u, du, ddu)
        }
        Dimension::Four => {
            let (sb, cb) = angles[0].sin_cos();
            let (st, ct) = angles[1].sin_cos();
            let (sp, cp) = angles[2].sin_cos();
            let u3 = [st * cp, st * sp, ct, 0.0];
            let u3t = [ct * cp, ct * sp, -st, 0.0];
            let u3p = [-st * sp, st * cp, 0.0, 0.0];
            let u3tp = [-ct * sp, ct * cp, 0.0, 0.0];
            let u3pp = [-st * cp, -st * sp, 0.0, 0.0];
            let lift = |v: &Vec4, s: f64, w: f64| [s * v[0], s * v[1], s * v[2], w];
            let u = lift(&u3, sb, cb);
            let du = [
                lift(&u3, cb, -sb),
                lift(&u3t, sb, 0.0),
                lift(&u3p, sb, 0.0),
            ];
            let ddu = [
                vecmath::scale(&u, -1.0),
                lift(&u3t, cb, 0.0),
                lift(&u3p, cb, 0.0),
                lift(&u3, -sb, 0.0),
                lift(&u3tp, sb, 0.0),
                lift(&u3pp, sb, 0.0),
            ];
            (u, du, ddu)
        }
    }
}

/// Reusable buffers for frame evaluation over many nodes.
struct SurfaceEval {
    ws: BasisWorkspace,
    values: Vec<f64>,
    grads: Vec<[f64; 3]>,
    hessians: Vec<[f64; 6]>,
}

impl SurfaceEval {
    fn new(table: &BasisTable) -> Self {
        SurfaceEval {
            ws: table.make_workspace(),
            values: vec![0.0; table.len()],
            grads: vec![[0.0; 3]; table.len()],
            hessians: vec![[0.0; 6]; table.len()],
        }
    }

    /// Frame and, if requested, mean curvature at one parameter point.
    fn frame(
        &mut self,
        coeffs: &HarmonicCoefficients,
        angles: &[f64],
        curvature: bool,
    ) -> Result<(SurfaceFrame, Option<f64>)> {
        let table = coeffs.table();
        let dim = coeffs.dimension();
        let na = dim.angle_count();
        table.derivatives_into(
            angles,
            &mut self.ws,
            &mut self.values,
            &mut self.grads,
            &mut self.hessians,
        )?;
        let a = coeffs.coefficients();
        let r = dot_slices(a, &self.values);
        if !(r > 0.0) {
            return Err(Error::InvalidDomain {
                radius: r,
                angles: angles.to_vec(),
            });
        }
        let mut dr = [0.0; 3];
        let mut ddr = [0.0; 6];
        for (p, &ap) in a.iter().enumerate() {
            if ap == 0.0 {
                continue;
            }
            for i in 0..na {
                dr[i] += ap * self.grads[p][i];
            }
            for k in 0..6 {
                ddr[k] += ap * self.hessians[p][k];
            }
        }
        let (u, du, ddu) = sphere_jet(dim, angles);

        // x = r u, x_i = r_i u + r u_i
        let point = vecmath::scale(&u, r);
        let mut tangents = [vecmath::ZERO; 3];
        for i in 0..na {
            let mut t = vecmath::scale(&u, dr[i]);
            vecmath::axpy(&mut t, r, &du[i]);
            tangents[i] = t;
        }

        let raw = match dim {
            Dimension::Three => vecmath::cross3(&tangents[0], &tangents[1]),
            // ordered so the result points outward for star-shaped graphs
            Dimension::Four => vecmath::scale(
                &vecmath::cross4(&tangents[0], &tangents[1], &tangents[2]),
                -1.0,
            ),
        };
        let area_element = vecmath::norm(&raw);
        if !(area_element > 0.0) {
            return Err(Error::DegenerateSurface {
                element: area_element,
                node: 0,
            });
        }
        let normal = vecmath::scale(&raw, 1.0 / area_element);
        if vecmath::dot(&normal, &u) <= 0.0 {
            return Err(Error::DegenerateSurface {
                element: vecmath::dot(&normal, &u),
                node: 0,
            });
        }
        let frame = SurfaceFrame {
            point,
            radial: u,
            normal,
            tangents,
            area_element,
            radius: r,
        };
        if !curvature {
            return Ok((frame, None));
        }

        // second fundamental form b_ij = x_ij . n against the outward normal;
        // H = -trace(g^{-1} b) makes the sphere positively curved
        let hidx = [[0usize, 1, 2], [1, 3, 4], [2, 4, 5]];
        let mut g = [[0.0; 3]; 3];
        let mut b = [[0.0; 3]; 3];
        for i in 0..na {
            for j in i..na {
                g[i][j] = vecmath::dot(&tangents[i], &tangents[j]);
                g[j][i] = g[i][j];
                let k = hidx[i][j];
                // x_ij = r_ij u + r_i u_j + r_j u_i + r u_ij
                let mut xij = vecmath::scale(&u, ddr[k]);
                vecmath::axpy(&mut xij, dr[i], &du[j]);
                vecmath::axpy(&mut xij, dr[j], &du[i]);
                vecmath::axpy(&mut xij, r, &ddu[k]);
                b[i][j] = vecmath::dot(&xij, &normal);
                b[j][i] = b[i][j];
            }
        }
        let h = -trace_inv_times(&g, &b, na)?;
        Ok((frame, Some(h)))
    }
}

/// trace(g^{-1} b) for symmetric g, b of size na x na stored in 3x3 arrays.
fn trace_inv_times(g: &[[f64; 3]; 3], b: &[[f64; 3]; 3], na: usize) -> Result<f64> {
    match na {
        2 => {
            let det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
            let scale = g[0][0].abs().max(g[1][1].abs());
            if det.abs() <= 1e-14 * scale * scale {
                return Err(Error::DegenerateMetric { det });
            }
            Ok((g[1][1] * b[0][0] - 2.0 * g[0][1] * b[0][1] + g[0][0] * b[1][1]) / det)
        }
        3 => {
            // adjugate of g, exploiting symmetry
            let c00 = g[1][1] * g[2][2] - g[1][2] * g[1][2];
            let c01 = g[0][2] * g[1][2] - g[0][1] * g[2][2];
            let c02 = g[0][1] * g[1][2] - g[0][2] * g[1][1];
            let c11 = g[0][0] * g[2][2] - g[0][2] * g[0][2];
            let c12 = g[0][1] * g[0][2] - g[0][0] * g[1][2];
            let c22 = g[0][0] * g[1][1] - g[0][1] * g[0][1];
            let det = g[0][0] * c00 + g[0][1] * c01 + g[0][2] * c02;
            let scale = g[0][0].abs().max(g[1][1].abs()).max(g[2][2].abs());
            if det.abs() <= 1e-14 * scale * scale * scale {
                return Err(Error::DegenerateMetric { det });
            }
            let tr = c00 * b[0][0]
                + c11 * b[1][1]
                + c22 * b[2][2]
                + 2.0 * (c01 * b[0][1] + c02 * b[0][2] + c12 * b[1][2]);
            Ok(tr / det)
        }
        _ => unreachable!("na is 2 or 3"),
    }
}

/// Parameter angles of a unit vector: inverse of the sphere parametrization.
/// At the coordinate poles the undetermined angles are returned as 0.
pub fn angles_of_unit(dimension: Dimension, u: &Vec4) -> [f64; 3] {
    match dimension {
        Dimension::Three => {
            let theta = u[2].clamp(-1.0, 1.0).acos();
            let phi = wrap_azimuth(u[1].atan2(u[0]));
            [theta, phi, 0.0]
        }
        Dimension::Four => {
            let beta = u[3].clamp(-1.0, 1.0).acos();
            let sb = beta.sin();
            if sb < 1e-300 {
                return [beta, 0.0, 0.0];
            }
            let theta = (u[2] / sb).clamp(-1.0, 1.0).acos();
            let phi = wrap_azimuth(u[1].atan2(u[0]));
            [beta, theta, phi]
        }
    }
}

fn wrap_azimuth(phi: f64) -> f64 {
    if phi < 0.0 {
        phi + 2.0 * PI
    } else {
        phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::sph3;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_domain(dim: Dimension, degree: u32, amp: f64, seed: u64) -> HarmonicCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = HarmonicCoefficients::ball(dim, degree, 1.0).unwrap();
        let mut a = c.coefficients().to_vec();
        for v in a.iter_mut().skip(1) {
            *v = amp * (2.0 * rng.random::<f64>() - 1.0);
        }
        c = c.with_coefficients(a).unwrap();
        c
    }

    #[test]
    fn boundary_map_unit_sphere() {
        let c = HarmonicCoefficients::ball(Dimension::Three, 2, 1.0).unwrap();
        let x = boundary_map(&c, &[PI / 2.0, 0.0]).unwrap();
        assert!(vecmath::norm(&vecmath::sub(&x, &[1.0, 0.0, 0.0, 0.0])) < 1e-14);

        let c4 = HarmonicCoefficients::ball(Dimension::Four, 1, 1.0).unwrap();
        let x = boundary_map(&c4, &[0.0, 1.1, 2.2]).unwrap();
        assert!(vecmath::norm(&vecmath::sub(&x, &[0.0, 0.0, 0.0, 1.0])) < 1e-14);
    }

    #[test]
    fn boundary_map_pole_height() {
        // r = 1 + 0.4 S_2^0 along the polar axis
        let mut c = HarmonicCoefficients::ball(Dimension::Three, 2, 1.0).unwrap();
        let mut a = c.coefficients().to_vec();
        let p = c.table().position(BasisIndex::three(2, 0)).unwrap();
        a[p] = 0.4;
        c = c.with_coefficients(a).unwrap();
        let x = boundary_map(&c, &[0.0, 0.0]).unwrap();
        let expect = 1.0 + 0.4 * sph3(BasisIndex::three(2, 0), 0.0, 0.0).unwrap();
        assert!((x[2] - expect).abs() < 1e-13);
        assert!(x[0].abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn boundary_map_rejects_nonpositive_radius() {
        let mut c = HarmonicCoefficients::ball(Dimension::Three, 1, 1.0).unwrap();
        let mut a = c.coefficients().to_vec();
        a[0] = -a[0];
        c = c.with_coefficients(a).unwrap();
        assert!(matches!(
            boundary_map(&c, &[1.0, 1.0]),
            Err(Error::InvalidDomain { .. })
        ));
    }

    #[test]
    fn sphere_quadrature_area_and_normals() {
        let c = HarmonicCoefficients::ball(Dimension::Three, 3, 1.0).unwrap();
        let q = build_quadrature(&c, GridResolution::default_for(Dimension::Three)).unwrap();
        assert!((q.surface_area() - 4.0 * PI).abs() < 1e-8);
        for (n, u) in q.normals().iter().zip(q.radial_directions()) {
            assert!((vecmath::norm(n) - 1.0).abs() < 1e-12);
            assert!(vecmath::norm(&vecmath::sub(n, u)) < 1e-10);
        }
        for &h in q.curvatures() {
            assert!((h - 2.0).abs() < 1e-9);
        }

        let c4 = HarmonicCoefficients::ball(Dimension::Four, 2, 2.0).unwrap();
        let q4 = build_quadrature(&c4, GridResolution::default_for(Dimension::Four)).unwrap();
        let want = 2.0 * PI * PI * 8.0;
        assert!((q4.surface_area() - want).abs() < 1e-6 * want);
        for (n, u) in q4.normals().iter().zip(q4.radial_directions()) {
            assert!((vecmath::norm(n) - 1.0).abs() < 1e-12);
            assert!(vecmath::norm(&vecmath::sub(n, u)) < 1e-10);
        }
        for &h in q4.curvatures() {
            assert!((h - 1.5).abs() < 1e-9, "H = 3/R for the 4D sphere");
        }
    }

    #[test]
    fn volumes_of_balls_and_scaling() {
        let c = HarmonicCoefficients::ball(Dimension::Three, 4, 1.0).unwrap();
        assert!((volume(&c).unwrap() - 4.0 * PI / 3.0).abs() < 1e-10);
        let c4 = HarmonicCoefficients::ball(Dimension::Four, 2, 1.0).unwrap();
        assert!((volume(&c4).unwrap() - PI * PI / 2.0).abs() < 1e-10);

        let dom = random_domain(Dimension::Three, 4, 0.1, 7);
        let v = volume(&dom).unwrap();
        for t in [0.5, 2.0] {
            let vt = volume(&dom.scaled(t).unwrap()).unwrap();
            assert!((vt - t.powi(3) * v).abs() < 1e-12 * vt.abs());
        }
        let dom4 = random_domain(Dimension::Four, 3, 0.05, 11);
        let v = volume(&dom4).unwrap();
        for t in [0.5, 2.0] {
            let vt = volume(&dom4.scaled(t).unwrap()).unwrap();
            assert!((vt - t.powi(4) * v).abs() < 1e-12 * vt.abs());
        }
    }

    #[test]
    fn volume_converges_under_refinement() {
        let mut c = HarmonicCoefficients::ball(Dimension::Three, 2, 1.0).unwrap();
        let mut a = c.coefficients().to_vec();
        a[c.table().position(BasisIndex::three(2, 0)).unwrap()] = 0.4;
        c = c.with_coefficients(a).unwrap();
        let res = GridResolution::default_for(Dimension::Three);
        let v1 = volume_on(&c, &SphereRule::new(res).unwrap()).unwrap();
        let v2 = volume_on(&c, &SphereRule::new(res.doubled()).unwrap()).unwrap();
        assert!((v1 - v2).abs() < 1e-8);
    }

    #[test]
    fn volume_gradient_on_sphere() {
        let c = HarmonicCoefficients::ball(Dimension::Three, 3, 1.0).unwrap();
        let g = volume_gradient(&c).unwrap();
        assert!((g[0] - (4.0 * PI).sqrt()).abs() < 1e-10);
        for &gp in &g[1..] {
            assert!(gp.abs() < 1e-10);
        }
    }

    #[test]
    fn volume_gradient_matches_finite_differences() {
        for (dim, seed) in [(Dimension::Three, 3u64), (Dimension::Four, 5)] {
            let degree = if dim == Dimension::Three { 4 } else { 3 };
            let dom = random_domain(dim, degree, 0.08, seed);
            let rule = SphereRule::new(match dim {
                Dimension::Three => GridResolution::ThreeD { theta: 24, phi: 48 },
                Dimension::Four => GridResolution::FourD {
                    beta: 16,
                    theta: 16,
                    phi: 32,
                },
            })
            .unwrap();
            let g = volume_gradient_on(&dom, &rule).unwrap();
            let h = 1e-5;
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            for _ in 0..6 {
                let p = rng.random_range(0..dom.len());
                let mut e = vec![0.0; dom.len()];
                e[p] = 1.0;
                let vp = volume_on(&dom.perturbed(&e, h).unwrap(), &rule).unwrap();
                let vm = volume_on(&dom.perturbed(&e, -h).unwrap(), &rule).unwrap();
                let fd = (vp - vm) / (2.0 * h);
                assert!(
                    (g[p] - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                    "{dim}D component {p}: {} vs {fd}",
                    g[p]
                );
            }
        }
    }

    /// Curvature against a fully finite-difference rebuild of the
    /// fundamental forms from boundary_map alone.
    fn fd_mean_curvature(c: &HarmonicCoefficients, angles: &[f64]) -> f64 {
        let na = c.dimension().angle_count();
        let h = 1e-4;
        let x0 = boundary_map(c, angles).unwrap();
        let mut tan = [vecmath::ZERO; 3];
        let mut sec = [[vecmath::ZERO; 3]; 3];
        for i in 0..na {
            let mut up = angles.to_vec();
            let mut dn = angles.to_vec();
            up[i] += h;
            dn[i] -= h;
            let xp = boundary_map(c, &up).unwrap();
            let xm = boundary_map(c, &dn).unwrap();
            tan[i] = vecmath::scale(&vecmath::sub(&xp, &xm), 0.5 / h);
            sec[i][i] = vecmath::scale(
                &vecmath::add(&vecmath::add(&xp, &xm), &vecmath::scale(&x0, -2.0)),
                1.0 / (h * h),
            );
        }
        for i in 0..na {
            for j in (i + 1)..na {
                let mut pp = angles.to_vec();
                let mut pm = angles.to_vec();
                let mut mp = angles.to_vec();
                let mut mm = angles.to_vec();
                pp[i] += h;
                pp[j] += h;
                pm[i] += h;
                pm[j] -= h;
                mp[i] -= h;
                mp[j] += h;
                mm[i] -= h;
                mm[j] -= h;
                let v = vecmath::scale(
                    &vecmath::sub(
                        &vecmath::sub(
                            &boundary_map(c, &pp).unwrap(),
                            &boundary_map(c, &pm).unwrap(),
                        ),
                        &vecmath::sub(
                            &boundary_map(c, &mp).unwrap(),
                            &boundary_map(c, &mm).unwrap(),
                        ),
                    ),
                    0.25 / (h * h),
                );
                sec[i][j] = v;
                sec[j][i] = v;
            }
        }
        let raw = match c.dimension() {
            Dimension::Three => vecmath::cross3(&tan[0], &tan[1]),
            Dimension::Four => {
                vecmath::scale(&vecmath::cross4(&tan[0], &tan[1], &tan[2]), -1.0)
            }
        };
        let normal = vecmath::scale(&raw, 1.0 / vecmath::norm(&raw));
        let mut g = [[0.0; 3]; 3];
        let mut b = [[0.0; 3]; 3];
        for i in 0..na {
            for j in 0..na {
                g[i][j] = vecmath::dot(&tan[i], &tan[j]);
                b[i][j] = vecmath::dot(&sec[i][j], &normal);
            }
        }
        -trace_inv_times(&g, &b, na).unwrap()
    }

    #[test]
    fn curvature_matches_finite_differences() {
        let mut c = HarmonicCoefficients::ball(Dimension::Three, 2, 1.0).unwrap();
        let mut a = c.coefficients().to_vec();
        a[c.table().position(BasisIndex::three(2, 0)).unwrap()] = 0.1;
        c = c.with_coefficients(a).unwrap();
        let angles = [PI / 2.0, 0.0];
        let h = mean_curvature(&c, &angles).unwrap();
        let fd = fd_mean_curvature(&c, &angles);
        assert!((h - fd).abs() < 1e-4 * (1.0 + fd.abs()), "{h} vs {fd}");

        for (dim, seed) in [
            (Dimension::Three, 21u64),
            (Dimension::Three, 22),
            (Dimension::Three, 23),
            (Dimension::Four, 31),
        ] {
            let dom = random_domain(dim, 3, 0.08, seed);
            let angles: Vec<f64> = match dim {
                Dimension::Three => vec![1.2, 0.9],
                Dimension::Four => vec![0.8, 1.7, 3.0],
            };
            let h = mean_curvature(&dom, &angles).unwrap();
            let fd = fd_mean_curvature(&dom, &angles);
            assert!(
                (h - fd).abs() < 1e-4 * (1.0 + fd.abs()),
                "{dim}D: {h} vs {fd}"
            );
        }
    }

    #[test]
    fn normals_point_outward_on_perturbed_domains() {
        for seed in [1u64, 2, 3] {
            let dom = random_domain(Dimension::Three, 4, 0.3, seed);
            let q = build_quadrature(
                &dom,
                GridResolution::ThreeD {
                    theta: 32,
                    phi: 64,
                },
            )
            .unwrap();
            for (n, u) in q.normals().iter().zip(q.radial_directions()) {
                assert!(vecmath::dot(n, u) > 0.0);
            }
        }
    }

    #[test]
    fn angles_of_unit_inverts_parametrization() {
        for dim in [Dimension::Three, Dimension::Four] {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..50 {
                let mut u = vecmath::ZERO;
                for k in 0..dim.ambient() {
                    u[k] = rng.random::<f64>() - 0.5;
                }
                let n = vecmath::norm(&u);
                let u = vecmath::scale(&u, 1.0 / n);
                let ang = angles_of_unit(dim, &u);
                let (v, _, _) = sphere_jet(dim, &ang);
                assert!(vecmath::norm(&vecmath::sub(&u, &v)) < 1e-12);
            }
        }
    }
}
