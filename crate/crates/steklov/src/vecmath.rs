//! Small fixed-size vector helpers.
//!
//! Points and vectors live in `[f64; 4]` regardless of the ambient dimension;
//! in 3D the last component stays zero, so dot products and norms can run
//! over all four lanes unconditionally.

pub type Vec4 = [f64; 4];

pub const ZERO: Vec4 = [0.0; 4];

#[inline]
pub fn dot(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn norm(a: &Vec4) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
pub fn add(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn scale(a: &Vec4, s: f64) -> Vec4 {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

#[inline]
pub fn axpy(y: &mut Vec4, a: f64, x: &Vec4) {
    y[0] += a * x[0];
    y[1] += a * x[1];
    y[2] += a * x[2];
    y[3] += a * x[3];
}

/// Cross product of the first three components.
#[inline]
pub fn cross3(a: &Vec4, b: &Vec4) -> Vec4 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
        0.0,
    ]
}

/// Generalized cross product of three vectors in R^4: the vector orthogonal
/// to all three whose norm is the 3-volume of the spanned parallelepiped.
/// Computed by cofactor expansion of det(e; a; b; c) along the first row.
pub fn cross4(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let minor = |c0: usize, c1: usize, c2: usize| -> f64 {
        a[c0] * (b[c1] * c[c2] - b[c2] * c[c1]) - a[c1] * (b[c0] * c[c2] - b[c2] * c[c0])
            + a[c2] * (b[c0] * c[c1] - b[c1] * c[c0])
    };
    [
        minor(1, 2, 3),
        -minor(0, 2, 3),
        minor(0, 1, 3),
        -minor(0, 1, 2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross3_basis() {
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0, 0.0];
        assert_eq!(cross3(&e1, &e2), [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn cross4_orthogonal_and_oriented() {
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0, 0.0];
        let e3 = [0.0, 0.0, 1.0, 0.0];
        let n = cross4(&e1, &e2, &e3);
        // det(e4; e1; e2; e3) = -1, so the e4 component carries that sign
        assert_eq!(n, [0.0, 0.0, 0.0, -1.0]);

        let a = [0.3, -1.2, 0.5, 0.9];
        let b = [1.1, 0.2, -0.4, 0.6];
        let c = [-0.7, 0.8, 1.3, 0.1];
        let n = cross4(&a, &b, &c);
        assert!(dot(&n, &a).abs() < 1e-12);
        assert!(dot(&n, &b).abs() < 1e-12);
        assert!(dot(&n, &c).abs() < 1e-12);
    }
}
