//! Real spherical harmonics on S^2 and hyperspherical harmonics on S^3.
//!
//! The 3D family is the usual three-branch real basis
//!
//! ```text
//! S_l^m = sqrt(2) k_l^m cos(m phi) P_l^m(cos theta)   m > 0
//!         k_l^0 P_l^0(cos theta)                      m = 0
//!         sqrt(2) k_l^m sin(-m phi) P_l^{-m}(cos theta)  m < 0
//! ```
//!
//! with `k_l^m = sqrt((2l+1)(l-|m|)! / (4 pi (l+|m|)!))` and the
//! Condon-Shortley phase included in `P_l^m`. The 4D family composes a
//! Gegenbauer factor in the extra polar angle with the 3D basis:
//!
//! ```text
//! S_nl^m(beta, theta, phi) = c_nl sin^l(beta) C_{n-l}^{l+1}(cos beta) S_l^m(theta, phi)
//! ```
//!
//! where `c_nl` makes the family orthonormal in L^2(S^3). Both families are
//! evaluated by ascending three-term recurrences, which stay stable well past
//! the truncation degrees used here.

use crate::error::{Error, Result};

use std::f64::consts::PI;

/// Slack accepted on `|x| <= 1` and angle-range checks before rejecting.
const DOMAIN_TOL: f64 = 1e-12;

/// Smallest sin(theta) at which colatitude derivatives are still formed.
/// The derivative recurrences divide by sin(theta) once.
const MIN_SIN_THETA: f64 = 1e-12;

/// Ambient dimension of the optimization problem.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Dimension {
    Three,
    Four,
}

impl Dimension {
    pub fn from_ambient(d: usize) -> Result<Self> {
        match d {
            3 => Ok(Dimension::Three),
            4 => Ok(Dimension::Four),
            _ => Err(Error::InvalidArgument {
                name: "dimension",
                value: d.to_string(),
                reason: "only 3 and 4 are supported".into(),
            }),
        }
    }

    /// Number of ambient coordinates (3 or 4).
    pub fn ambient(self) -> usize {
        match self {
            Dimension::Three => 3,
            Dimension::Four => 4,
        }
    }

    /// Number of parametrizing angles on the unit sphere (2 or 3).
    pub fn angle_count(self) -> usize {
        self.ambient() - 1
    }

    /// Volume of the unit ball, 4 pi / 3 in 3D and pi^2 / 2 in 4D.
    pub fn unit_ball_volume(self) -> f64 {
        match self {
            Dimension::Three => 4.0 * PI / 3.0,
            Dimension::Four => PI * PI / 2.0,
        }
    }

    /// Surface area of the unit sphere S^{d-1}.
    pub fn unit_sphere_area(self) -> f64 {
        // |S^{d-1}| = d * alpha(d)
        self.ambient() as f64 * self.unit_ball_volume()
    }

    /// Number of basis functions of degree at most `n`:
    /// (N+1)^2 in 3D and (N+1)(N+2)(2N+3)/6 in 4D.
    pub fn basis_len(self, n: u32) -> usize {
        let n = n as usize;
        match self {
            Dimension::Three => (n + 1) * (n + 1),
            Dimension::Four => (n + 1) * (n + 2) * (2 * n + 3) / 6,
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.ambient())
    }
}

/// Index of one basis function. 3D indices are pairs (l, m) with |m| <= l;
/// 4D indices are triples (n, l, m) with 0 <= l <= n and |m| <= l.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum BasisIndex {
    ThreeD { l: u32, m: i32 },
    FourD { n: u32, l: u32, m: i32 },
}

impl BasisIndex {
    pub fn three(l: u32, m: i32) -> Self {
        BasisIndex::ThreeD { l, m }
    }

    pub fn four(n: u32, l: u32, m: i32) -> Self {
        BasisIndex::FourD { n, l, m }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            BasisIndex::ThreeD { .. } => Dimension::Three,
            BasisIndex::FourD { .. } => Dimension::Four,
        }
    }

    /// Harmonic degree: l in 3D, n in 4D.
    pub fn degree(self) -> u32 {
        match self {
            BasisIndex::ThreeD { l, .. } => l,
            BasisIndex::FourD { n, .. } => n,
        }
    }

    pub fn validate(self) -> Result<()> {
        let ok = match self {
            BasisIndex::ThreeD { l, m } => m.unsigned_abs() <= l,
            BasisIndex::FourD { n, l, m } => l <= n && m.unsigned_abs() <= l,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidIndex(format!("{self}")))
        }
    }
}

impl std::fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            BasisIndex::ThreeD { l, m } => write!(f, "(l={l}, m={m})"),
            BasisIndex::FourD { n, l, m } => write!(f, "(n={n}, l={l}, m={m})"),
        }
    }
}

fn check_unit_interval(name: &'static str, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + DOMAIN_TOL) {
        return Err(Error::InvalidArgument {
            name,
            value: x.to_string(),
            reason: "must lie in [-1, 1]".into(),
        });
    }
    Ok(x.clamp(-1.0, 1.0))
}

fn check_colatitude(name: &'static str, angle: f64) -> Result<f64> {
    if !(-DOMAIN_TOL..=PI + DOMAIN_TOL).contains(&angle) {
        return Err(Error::InvalidArgument {
            name,
            value: angle.to_string(),
            reason: "must lie in [0, pi]".into(),
        });
    }
    Ok(angle.clamp(0.0, PI))
}

/// Associated Legendre polynomial P_l^m(x) with the Condon-Shortley phase,
/// so P_1^1(x) = -sqrt(1 - x^2).
pub fn legendre(l: u32, m: u32, x: f64) -> Result<f64> {
    if m > l {
        return Err(Error::InvalidIndex(format!(
            "legendre order m={m} exceeds degree l={l}"
        )));
    }
    let x = check_unit_interval("x", x)?;
    let s = (1.0 - x * x).max(0.0).sqrt();

    // P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    if l == m {
        return Ok(pmm);
    }
    // P_{m+1}^m = x (2m+1) P_m^m
    let mut prev = pmm;
    let mut cur = x * (2 * m + 1) as f64 * pmm;
    // (l-m) P_l^m = x (2l-1) P_{l-1}^m - (l+m-1) P_{l-2}^m
    for ll in (m + 2)..=l {
        let next = (x * (2 * ll - 1) as f64 * cur - (ll + m - 1) as f64 * prev)
            / (ll - m) as f64;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Gegenbauer polynomial C_k^alpha(x) in the generating-function convention,
/// so C_1^alpha(x) = 2 alpha x.
pub fn gegenbauer(k: u32, alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "alpha",
            value: alpha.to_string(),
            reason: "must be positive and finite".into(),
        });
    }
    let x = check_unit_interval("x", x)?;
    if k == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * alpha * x;
    // k C_k = 2 (k + alpha - 1) x C_{k-1} - (k + 2 alpha - 2) C_{k-2}
    for kk in 2..=k {
        let kf = kk as f64;
        let next = (2.0 * (kf + alpha - 1.0) * x * cur - (kf + 2.0 * alpha - 2.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// ln(k!) for k = 0..=max, built by cumulative summation.
fn ln_factorials(max: usize) -> Vec<f64> {
    let mut t = vec![0.0; max + 1];
    for k in 1..=max {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// k_l^m = sqrt((2l+1)(l-|m|)! / (4 pi (l+|m|)!)).
fn norm_k3(l: u32, m_abs: u32, ln_fact: &[f64]) -> f64 {
    let ln = ((2 * l + 1) as f64).ln() - (4.0 * PI).ln() + ln_fact[(l - m_abs) as usize]
        - ln_fact[(l + m_abs) as usize];
    (0.5 * ln).exp()
}

/// c_nl = 2^{l + 1/2} Gamma(l+1) sqrt((n+1) Gamma(n-l+1) / (pi Gamma(n+l+2))),
/// the constant that normalizes sin^l(beta) C_{n-l}^{l+1}(cos beta) in L^2.
fn norm_c4(n: u32, l: u32, ln_fact: &[f64]) -> f64 {
    let ln = (l as f64 + 0.5) * std::f64::consts::LN_2
        + ln_fact[l as usize]
        + 0.5
            * (((n + 1) as f64).ln() + ln_fact[(n - l) as usize]
                - PI.ln()
                - ln_fact[(n + l + 1) as usize]);
    ln.exp()
}

/// Real 3D spherical harmonic S_l^m(theta, phi) at one point.
pub fn sph3(idx: BasisIndex, theta: f64, phi: f64) -> Result<f64> {
    idx.validate()?;
    let BasisIndex::ThreeD { l, m } = idx else {
        return Err(Error::InvalidIndex(format!("expected a 3D index, got {idx}")));
    };
    let theta = check_colatitude("theta", theta)?;
    let m_abs = m.unsigned_abs();
    let p = legendre(l, m_abs, theta.cos())?;
    let ln_fact = ln_factorials((2 * l) as usize);
    let k = norm_k3(l, m_abs, &ln_fact);
    let v = match m.cmp(&0) {
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * (m as f64 * phi).cos(),
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * (m_abs as f64 * phi).sin(),
    };
    Ok(k * v * p)
}

/// Real 4D hyperspherical harmonic S_nl^m(beta, theta, phi) at one point.
pub fn sph4(idx: BasisIndex, beta: f64, theta: f64, phi: f64) -> Result<f64> {
    idx.validate()?;
    let BasisIndex::FourD { n, l, m } = idx else {
        return Err(Error::InvalidIndex(format!("expected a 4D index, got {idx}")));
    };
    let beta = check_colatitude("beta", beta)?;
    let g = gegenbauer(n - l, (l + 1) as f64, beta.cos())?;
    let ln_fact = ln_factorials((n + l + 1) as usize);
    let c = norm_c4(n, l, &ln_fact);
    let angular = sph3(BasisIndex::three(l, m), theta, phi)?;
    Ok(c * beta.sin().powi(l as i32) * g * angular)
}

/// Basis of all harmonics of degree at most N in one dimension, with
/// normalization constants precomputed. Enumeration is lexicographic in
/// (l, m) for 3D and (n, l, m) for 4D, m running from -l to l.
#[derive(Clone, Debug)]
pub struct BasisTable {
    dimension: Dimension,
    degree: u32,
    indices: Vec<BasisIndex>,
    /// Full normalization constant per basis function, including the sqrt(2)
    /// of the m != 0 branches and, in 4D, the Gegenbauer constant c_nl.
    norms: Vec<f64>,
}

impl BasisTable {
    pub fn new(dimension: Dimension, degree: u32) -> Self {
        let count = dimension.basis_len(degree);
        let mut indices = Vec::with_capacity(count);
        let mut norms = Vec::with_capacity(count);
        let ln_fact = ln_factorials((2 * degree + 1) as usize + 1);
        match dimension {
            Dimension::Three => {
                for l in 0..=degree {
                    for m in -(l as i32)..=(l as i32) {
                        indices.push(BasisIndex::three(l, m));
                        let k = norm_k3(l, m.unsigned_abs(), &ln_fact);
                        norms.push(if m == 0 { k } else { std::f64::consts::SQRT_2 * k });
                    }
                }
            }
            Dimension::Four => {
                for n in 0..=degree {
                    for l in 0..=n {
                        let c = norm_c4(n, l, &ln_fact);
                        for m in -(l as i32)..=(l as i32) {
                            indices.push(BasisIndex::four(n, l, m));
                            let k = norm_k3(l, m.unsigned_abs(), &ln_fact);
                            let k = if m == 0 { k } else { std::f64::consts::SQRT_2 * k };
                            norms.push(c * k);
                        }
                    }
                }
            }
        }
        debug_assert_eq!(indices.len(), count);
        BasisTable {
            dimension,
            degree,
            indices,
            norms,
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[BasisIndex] {
        &self.indices
    }

    pub fn index_at(&self, p: usize) -> BasisIndex {
        self.indices[p]
    }

    /// Flat position of an index in enumeration order, or None if the index
    /// is invalid or exceeds the truncation degree.
    pub fn position(&self, idx: BasisIndex) -> Option<usize> {
        if idx.validate().is_err() || idx.dimension() != self.dimension {
            return None;
        }
        match idx {
            BasisIndex::ThreeD { l, m } => {
                if l > self.degree {
                    return None;
                }
                let (l, m) = (l as usize, m as i64);
                Some(l * l + (m + l as i64) as usize)
            }
            BasisIndex::FourD { n, l, m } => {
                if n > self.degree {
                    return None;
                }
                let (n, l, m) = (n as usize, l as usize, m as i64);
                // sum of (n'+1)^2 over n' < n
                let before = n * (n + 1) * (2 * n + 1) / 6;
                Some(before + l * l + (m + l as i64) as usize)
            }
        }
    }

    pub fn make_workspace(&self) -> BasisWorkspace {
        BasisWorkspace::with_degree(self.degree)
    }

    fn check_angles(&self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.dimension.angle_count() {
            return Err(Error::InvalidArgument {
                name: "angles",
                value: format!("{} entries", angles.len()),
                reason: format!("expected {} angles", self.dimension.angle_count()),
            });
        }
        Ok(())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::CoefficientLength {
                got,
                expected: self.len(),
            });
        }
        Ok(())
    }

    /// Evaluate every basis function at one point of the unit sphere.
    /// `angles` is (theta, phi) in 3D and (beta, theta, phi) in 4D.
    /// Safe at the coordinate poles.
    pub fn values_into(
        &self,
        angles: &[f64],
        ws: &mut BasisWorkspace,
        out: &mut [f64],
    ) -> Result<()> {
        self.check_angles(angles)?;
        self.check_len(out.len())?;
        ws.ensure_degree(self.degree);
        match self.dimension {
            Dimension::Three => {
                let (theta, phi) = (check_colatitude("theta", angles[0])?, angles[1]);
                ws.fill_legendre(self.degree, theta.cos(), false)?;
                ws.fill_trig(self.degree, phi);
                self.assemble3(ws, out, None, None);
            }
            Dimension::Four => {
                let beta = check_colatitude("beta", angles[0])?;
                let theta = check_colatitude("theta", angles[1])?;
                let phi = angles[2];
                ws.fill_legendre(self.degree, theta.cos(), false)?;
                ws.fill_trig(self.degree, phi);
                ws.fill_gegenbauer(self.degree, beta, false);
                self.assemble4(ws, out, None, None);
            }
        }
        Ok(())
    }

    /// Evaluate every basis function together with first and second
    /// derivatives in the parametrizing angles. Gradient slots follow the
    /// angle order of `values_into`; unused trailing slots stay zero.
    /// Hessians are packed as the upper triangle (00, 01, 02, 11, 12, 22).
    /// Requires the colatitude theta to be strictly interior.
    pub fn derivatives_into(
        &self,
        angles: &[f64],
        ws: &mut BasisWorkspace,
        values: &mut [f64],
        grads: &mut [[f64; 3]],
        hessians: &mut [[f64; 6]],
    ) -> Result<()> {
        self.check_angles(angles)?;
        self.check_len(values.len())?;
        self.check_len(grads.len())?;
        self.check_len(hessians.len())?;
        ws.ensure_degree(self.degree);
        match self.dimension {
            Dimension::Three => {
                let (theta, phi) = (check_colatitude("theta", angles[0])?, angles[1]);
                ws.fill_legendre(self.degree, theta.cos(), true)?;
                ws.fill_trig(self.degree, phi);
                self.assemble3(ws, values, Some(grads), Some(hessians));
            }
            Dimension::Four => {
                let beta = check_colatitude("beta", angles[0])?;
                let theta = check_colatitude("theta", angles[1])?;
                let phi = angles[2];
                ws.fill_legendre(self.degree, theta.cos(), true)?;
                ws.fill_trig(self.degree, phi);
                ws.fill_gegenbauer(self.degree, beta, true);
                self.assemble4(ws, values, Some(grads), Some(hessians));
            }
        }
        Ok(())
    }

    fn assemble3(
        &self,
        ws: &BasisWorkspace,
        values: &mut [f64],
        mut grads: Option<&mut [[f64; 3]]>,
        mut hessians: Option<&mut [[f64; 6]]>,
    ) {
        for (p, idx) in self.indices.iter().enumerate() {
            let BasisIndex::ThreeD { l, m } = *idx else {
                unreachable!()
            };
            let ma = m.unsigned_abs();
            let ti = tri(l, ma);
            let norm = self.norms[p];
            let (t, dt) = ws.trig(m);
            values[p] = norm * t * ws.p[ti];
            if let Some(grads) = grads.as_deref_mut() {
                grads[p] = [norm * t * ws.pt[ti], norm * dt * ws.p[ti], 0.0];
            }
            if let Some(hess) = hessians.as_deref_mut() {
                let m2 = (ma * ma) as f64;
                hess[p] = [
                    norm * t * ws.ptt[ti],
                    norm * dt * ws.pt[ti],
                    0.0,
                    -m2 * values[p],
                    0.0,
                    0.0,
                ];
            }
        }
    }

    fn assemble4(
        &self,
        ws: &BasisWorkspace,
        values: &mut [f64],
        mut grads: Option<&mut [[f64; 3]]>,
        mut hessians: Option<&mut [[f64; 6]]>,
    ) {
        let nmax = self.degree;
        for (p, idx) in self.indices.iter().enumerate() {
            let BasisIndex::FourD { n, l, m } = *idx else {
                unreachable!()
            };
            let ma = m.unsigned_abs();
            let ti = tri(l, ma);
            let gi = pack(nmax, l, n - l);
            let norm = self.norms[p];
            let (t, dt) = ws.trig(m);
            let (f, pv) = (ws.f[gi], ws.p[ti]);
            values[p] = norm * f * t * pv;
            if let Some(grads) = grads.as_deref_mut() {
                grads[p] = [
                    norm * ws.fb[gi] * t * pv,
                    norm * f * t * ws.pt[ti],
                    norm * f * dt * pv,
                ];
            }
            if let Some(hess) = hessians.as_deref_mut() {
                let m2 = (ma * ma) as f64;
                hess[p] = [
                    norm * ws.fbb[gi] * t * pv,
                    norm * ws.fb[gi] * t * ws.pt[ti],
                    norm * ws.fb[gi] * dt * pv,
                    norm * f * t * ws.ptt[ti],
                    norm * f * dt * ws.pt[ti],
                    -m2 * values[p],
                ];
            }
        }
    }
}

/// Triangular index for tables over (l, m) with 0 <= m <= l.
#[inline]
fn tri(l: u32, m: u32) -> usize {
    let (l, m) = (l as usize, m as usize);
    l * (l + 1) / 2 + m
}

/// Packed index for tables over (l, k) with 0 <= k <= N - l.
#[inline]
fn pack(nmax: u32, l: u32, k: u32) -> usize {
    let (nmax, l, k) = (nmax as usize, l as usize, k as usize);
    l * (nmax + 1) - l * l.saturating_sub(1) / 2 + k
}

/// Reusable evaluation buffers for one point at a time. Holding one of these
/// per worker thread avoids per-node allocation in the quadrature loops.
#[derive(Clone, Debug)]
pub struct BasisWorkspace {
    degree: u32,
    /// P_l^m(cos theta) and its first two theta derivatives, triangular in (l, m).
    p: Vec<f64>,
    pt: Vec<f64>,
    ptt: Vec<f64>,
    /// cos(m phi), sin(m phi) for m = 0..=N.
    cosm: Vec<f64>,
    sinm: Vec<f64>,
    /// F = sin^l(beta) C_{n-l}^{l+1}(cos beta) and its first two beta
    /// derivatives, packed over (l, k = n - l). 4D only.
    f: Vec<f64>,
    fb: Vec<f64>,
    fbb: Vec<f64>,
    /// Scratch for the three Gegenbauer families used per l.
    g0: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
}

impl BasisWorkspace {
    pub fn with_degree(degree: u32) -> Self {
        let n = degree as usize;
        let tri_len = (n + 1) * (n + 2) / 2;
        BasisWorkspace {
            degree,
            p: vec![0.0; tri_len],
            pt: vec![0.0; tri_len],
            ptt: vec![0.0; tri_len],
            cosm: vec![0.0; n + 1],
            sinm: vec![0.0; n + 1],
            f: vec![0.0; tri_len],
            fb: vec![0.0; tri_len],
            fbb: vec![0.0; tri_len],
            g0: vec![0.0; n + 1],
            g1: vec![0.0; n + 1],
            g2: vec![0.0; n + 1],
        }
    }

    fn ensure_degree(&mut self, degree: u32) {
        if degree > self.degree {
            *self = BasisWorkspace::with_degree(degree);
        }
    }

    /// Angular factor and its phi derivative for signed order m.
    #[inline]
    fn trig(&self, m: i32) -> (f64, f64) {
        let ma = m.unsigned_abs() as usize;
        match m.cmp(&0) {
            std::cmp::Ordering::Greater => (self.cosm[ma], -(ma as f64) * self.sinm[ma]),
            std::cmp::Ordering::Equal => (1.0, 0.0),
            std::cmp::Ordering::Less => (self.sinm[ma], ma as f64 * self.cosm[ma]),
        }
    }

    fn fill_trig(&mut self, nmax: u32, phi: f64) {
        for m in 0..=nmax as usize {
            let (s, c) = (m as f64 * phi).sin_cos();
            self.cosm[m] = c;
            self.sinm[m] = s;
        }
    }

    /// Fill P_l^m(x) for 0 <= m <= l <= nmax, and the theta derivatives when
    /// `derivs` is set. Derivatives require x strictly inside (-1, 1).
    fn fill_legendre(&mut self, nmax: u32, x: f64, derivs: bool) -> Result<()> {
        let s = (1.0 - x * x).max(0.0).sqrt();
        if derivs && s < MIN_SIN_THETA {
            return Err(Error::InvalidArgument {
                name: "theta",
                value: x.acos().to_string(),
                reason: "colatitude derivatives are undefined at the poles".into(),
            });
        }
        let mut pmm = 1.0;
        for m in 0..=nmax {
            if m > 0 {
                pmm *= -((2 * m - 1) as f64) * s;
            }
            self.p[tri(m, m)] = pmm;
            if m < nmax {
                self.p[tri(m + 1, m)] = x * (2 * m + 1) as f64 * pmm;
                for l in (m + 2)..=nmax {
                    self.p[tri(l, m)] = (x * (2 * l - 1) as f64 * self.p[tri(l - 1, m)]
                        - (l + m - 1) as f64 * self.p[tri(l - 2, m)])
                        / (l - m) as f64;
                }
            }
        }
        if !derivs {
            return Ok(());
        }
        // dP/dtheta = (l x P_l^m - (l+m) P_{l-1}^m) / sin(theta), and
        // d2P/dtheta2 follows from the Legendre equation in theta form.
        for l in 0..=nmax {
            for m in 0..=l {
                let ti = tri(l, m);
                let below = if l > 0 && m <= l - 1 {
                    self.p[tri(l - 1, m)]
                } else {
                    0.0
                };
                let pt = (l as f64 * x * self.p[ti] - (l + m) as f64 * below) / s;
                self.pt[ti] = pt;
                let ll1 = (l * (l + 1)) as f64;
                let m2 = (m * m) as f64;
                self.ptt[ti] = -(x / s) * pt - (ll1 - m2 / (s * s)) * self.p[ti];
            }
        }
        Ok(())
    }

    /// Fill F = sin^l(beta) C_{n-l}^{l+1}(cos beta) for all (l, n) up to nmax,
    /// and the beta derivatives when `derivs` is set. Safe at beta = 0, pi.
    fn fill_gegenbauer(&mut self, nmax: u32, beta: f64, derivs: bool) {
        let (s, c) = beta.sin_cos();
        let s = s.max(0.0);
        let mut s_pow = 1.0; // s^l, updated per l
        for l in 0..=nmax {
            let alpha = (l + 1) as f64;
            let kmax = (nmax - l) as usize;
            gegenbauer_family(&mut self.g0[..=kmax], alpha, c);
            if derivs {
                if kmax >= 1 {
                    gegenbauer_family(&mut self.g1[..kmax], alpha + 1.0, c);
                }
                if kmax >= 2 {
                    gegenbauer_family(&mut self.g2[..kmax - 1], alpha + 2.0, c);
                }
            }
            let lf = l as f64;
            // Powers of sin(beta) below s^l appear only with coefficients l or
            // l(l-1), so the zero-coefficient branches never form 0^negative.
            let s_lm1 = if l >= 1 { powi_nonneg(s, l - 1) } else { 0.0 };
            let s_lm2 = if l >= 2 { powi_nonneg(s, l - 2) } else { 0.0 };
            for k in 0..=kmax {
                let gi = pack(nmax, l, k as u32);
                let g = self.g0[k];
                self.f[gi] = s_pow * g;
                if !derivs {
                    continue;
                }
                let dg = if k >= 1 { 2.0 * alpha * self.g1[k - 1] } else { 0.0 };
                let ddg = if k >= 2 {
                    4.0 * alpha * (alpha + 1.0) * self.g2[k - 2]
                } else {
                    0.0
                };
                let mut fb = -s_pow * s * dg;
                let mut fbb = -lf * s_pow * g - (2.0 * lf + 1.0) * s_pow * c * dg
                    + s_pow * s * s * ddg;
                if l >= 1 {
                    fb += lf * s_lm1 * c * g;
                }
                if l >= 2 {
                    fbb += lf * (lf - 1.0) * s_lm2 * c * c * g;
                }
                self.fb[gi] = fb;
                self.fbb[gi] = fbb;
            }
            s_pow *= s;
        }
    }
}

/// C_k^alpha(x) for k = 0..out.len()-1 by the ascending recurrence.
fn gegenbauer_family(out: &mut [f64], alpha: f64, x: f64) {
    if let Some(first) = out.first_mut() {
        *first = 1.0;
    }
    if out.len() > 1 {
        out[1] = 2.0 * alpha * x;
    }
    for k in 2..out.len() {
        let kf = k as f64;
        out[k] = (2.0 * (kf + alpha - 1.0) * x * out[k - 1] - (kf + 2.0 * alpha - 2.0) * out[k - 2])
            / kf;
    }
}

/// x^e for e >= 0 without the powi sign checks.
#[inline]
fn powi_nonneg(x: f64, e: u32) -> f64 {
    let mut r = 1.0;
    for _ in 0..e {
        r *= x;
    }
    r
}
