//! Max-min ascent direction for a cluster of eigenvalue gradients.
//!
//! The direction maximizing min_j (g_j . v) over unit vectors v is p/|p|
//! where p is the minimum-norm point of the convex hull of the g_j, and the
//! attained value is |p|. The hull problem is a tiny QP over the simplex
//! solved exactly by Wolfe's algorithm on the Gram matrix.

use crate::error::{Error, Result};

/// Hull points whose combination norm falls below this fraction of the
/// largest gradient norm signal a (near-)stationary cluster.
pub const STATIONARY_TOL: f64 = 1e-10;

const WOLFE_EPS: f64 = 1e-14;

/// Result of the max-min direction problem.
#[derive(Clone, Debug)]
pub struct MaxMinDirection {
    /// Unit ascent direction, or None when the hull contains (numerically)
    /// the origin and no ascent direction exists.
    pub direction: Option<Vec<f64>>,
    /// min_j g_j . direction, zero in the stationary case.
    pub value: f64,
    /// Convex weights of the minimum-norm point.
    pub weights: Vec<f64>,
}

/// Minimum-norm point of conv{g_0, ..., g_{M-1}} together with its convex
/// weights.
pub fn min_norm_point(gradients: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = gradients.len();
    if m == 0 {
        return Err(Error::InvalidArgument {
            name: "gradients",
            value: "0".into(),
            reason: "need at least one gradient".into(),
        });
    }
    let p = gradients[0].len();
    for (j, g) in gradients.iter().enumerate() {
        if g.len() != p {
            return Err(Error::CoefficientLength { got: g.len(), expected: p });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "gradients",
                value: format!("entry {j}"),
                reason: "gradient has non-finite components".into(),
            });
        }
    }

    // Everything happens on the Gram matrix; the ambient dimension only
    // enters when the final point is reassembled.
    let mut gram = vec![0.0_f64; m * m];
    for i in 0..m {
        for j in 0..m {
            gram[i * m + j] = dot(&gradients[i], &gradients[j]);
        }
    }
    let scale2 = (0..m).map(|i| gram[i * m + i]).fold(0.0_f64, f64::max);
    if scale2 == 0.0 {
        // All gradients vanish; the hull is the origin.
        return Ok((vec![0.0; p], uniform(m)));
    }

    // Wolfe's algorithm: maintain a corral S with convex weights lambda.
    let start = (0..m).min_by(|&i, &j| gram[i * m + i].total_cmp(&gram[j * m + j])).unwrap();
    let mut corral = vec![start];
    let mut lambda = vec![1.0_f64];

    for _ in 0..64 * m {
        // x = sum lambda_i g_i; its inner products with every g_j come from
        // the Gram matrix.
        let xx = quad_form(&gram, m, &corral, &lambda);
        let mut best_j = 0;
        let mut best_ip = f64::INFINITY;
        for j in 0..m {
            let ip = corral
                .iter()
                .zip(&lambda)
                .map(|(&i, &w)| w * gram[j * m + i])
                .sum::<f64>();
            if ip < best_ip {
                best_ip = ip;
                best_j = j;
            }
        }
        if best_ip >= xx - WOLFE_EPS * scale2 || corral.contains(&best_j) {
            break;
        }
        corral.push(best_j);
        lambda.push(0.0);

        // Inner loop: pull the affine minimizer over the corral back into
        // the simplex, dropping vertices that hit zero.
        loop {
            let alpha = affine_min_norm(&gram, m, &corral, scale2);
            if alpha.iter().all(|&a| a > WOLFE_EPS) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (&l, &a) in lambda.iter().zip(&alpha) {
                if a <= WOLFE_EPS && l > a {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, &a) in lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let keep: Vec<usize> =
                (0..corral.len()).filter(|&i| lambda[i] > WOLFE_EPS).collect();
            if keep.len() == corral.len() {
                // Rounding kept every vertex positive; accept the move.
                break;
            }
            corral = keep.iter().map(|&i| corral[i]).collect();
            lambda = keep.iter().map(|&i| lambda[i]).collect();
            if corral.len() == 1 {
                lambda = vec![1.0];
                break;
            }
        }
    }

    // Reassemble the point and the full weight vector.
    let total: f64 = lambda.iter().sum();
    let mut weights = vec![0.0_f64; m];
    for (&i, &w) in corral.iter().zip(&lambda) {
        weights[i] = w / total;
    }
    let mut point = vec![0.0_f64; p];
    for (g, &w) in gradients.iter().zip(&weights) {
        for (x, &gi) in point.iter_mut().zip(g) {
            *x += w * gi;
        }
    }
    Ok((point, weights))
}

/// Solve the max-min direction problem for a cluster of gradients.
pub fn maxmin_direction(gradients: &[Vec<f64>]) -> Result<MaxMinDirection> {
    let (point, weights) = min_norm_point(gradients)?;
    let scale = gradients
        .iter()
        .map(|g| dot(g, g).sqrt())
        .fold(0.0_f64, f64::max);
    let norm = dot(&point, &point).sqrt();
    if norm <= STATIONARY_TOL * scale {
        return Ok(MaxMinDirection { direction: None, value: 0.0, weights });
    }
    let direction: Vec<f64> = point.iter().map(|x| x / norm).collect();
    let value = gradients
        .iter()
        .map(|g| dot(g, &direction))
        .fold(f64::INFINITY, f64::min);
    Ok(MaxMinDirection { direction: Some(direction), value, weights })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn uniform(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

fn quad_form(gram: &[f64], m: usize, corral: &[usize], w: &[f64]) -> f64 {
    let mut xx = 0.0;
    for (&i, &wi) in corral.iter().zip(w) {
        for (&j, &wj) in corral.iter().zip(w) {
            xx += wi * wj * gram[i * m + j];
        }
    }
    xx
}

/// Minimum-norm point over the affine hull of the corral: solve the KKT
/// system [2 Q, 1; 1^T, 0] [alpha; nu] = [0; 1] with a ridge at rounding
/// level to survive affinely dependent gradients.
fn affine_min_norm(gram: &[f64], m: usize, corral: &[usize], scale2: f64) -> Vec<f64> {
    let k = corral.len();
    let n = k + 1;
    let ridge = 1e-13 * scale2;
    let mut mat = vec![0.0_f64; n * n];
    let mut rhs = vec![0.0_f64; n];
    for a in 0..k {
        for b in 0..k {
            mat[a * n + b] = 2.0 * gram[corral[a] * m + corral[b]];
        }
        mat[a * n + a] += ridge;
        mat[a * n + k] = 1.0;
        mat[k * n + a] = 1.0;
    }
    rhs[k] = 1.0;
    solve_small(&mut mat, &mut rhs, n);
    rhs.truncate(k);
    rhs
}

/// Gaussian elimination with partial pivoting for the tiny KKT systems
/// (at most cluster size + 1 unknowns).
fn solve_small(mat: &mut [f64], rhs: &mut [f64], n: usize) {
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if mat[r * n + col].abs() > mat[piv * n + col].abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..n {
                mat.swap(col * n + c, piv * n + c);
            }
            rhs.swap(col, piv);
        }
        let d = mat[col * n + col];
        if d == 0.0 {
            continue;
        }
        for r in col + 1..n {
            let f = mat[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                mat[r * n + c] -= f * mat[col * n + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    for col in (0..n).rev() {
        let d = mat[col * n + col];
        if d == 0.0 {
            rhs[col] = 0.0;
            continue;
        }
        let mut v = rhs[col];
        for c in col + 1..n {
            v -= mat[col * n + c] * rhs[c];
        }
        rhs[col] = v / d;
    }
}
