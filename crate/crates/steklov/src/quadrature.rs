//! One-dimensional quadrature rules used to build surface grids.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on P_n with the Tricomi initial guess; accurate to
/// machine precision for the orders used here (n <= a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Chebyshev (second kind) nodes and weights on [-1, 1]: exact for
/// integrals of the form `int f(x) sqrt(1 - x^2) dx` with polynomial f.
pub fn gauss_chebyshev2(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64 + 1.0;
    for i in 0..n {
        let t = (i as f64 + 1.0) * PI / nf;
        // descending t gives ascending x
        nodes[n - 1 - i] = t.cos();
        weights[n - 1 - i] = PI / nf * t.sin() * t.sin();
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        // degree 9 is exact for n = 5
        let val: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((val - 2.0 / 9.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_large_order_weights_sum() {
        let (x, w) = gauss_legendre(128);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn chebyshev2_integrates_half_circle() {
        let (x, w) = gauss_chebyshev2(16);
        let total: f64 = w.iter().sum();
        assert!((total - PI / 2.0).abs() < 1e-14);
        // int x^2 sqrt(1-x^2) dx = pi / 8
        let val: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((val - PI / 8.0).abs() < 1e-14);
    }
}
