//! Analytic Steklov spectrum of balls.
//!
//! On the ball of radius R the eigenfunctions are the solid harmonics
//! r^l Y_l(xi), so sigma = l/R with the full harmonic multiplicity per degree:
//! 2l+1 in 3D and (l+1)^2 in 4D. Used as the exact reference for solver
//! validation.

use crate::error::{Error, Result};
use crate::harmonics::Dimension;

#[derive(Clone, Copy, Debug)]
pub struct BallOracle {
    dimension: Dimension,
    radius: f64,
}

impl BallOracle {
    pub fn new(dimension: Dimension, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "radius",
                value: radius.to_string(),
                reason: "ball radius must be positive".into(),
            });
        }
        Ok(Self { dimension, radius })
    }

    /// The ball of volume one, radius (1/alpha(d))^(1/d).
    pub fn unit_volume(dimension: Dimension) -> Self {
        let d = dimension.ambient() as f64;
        Self { dimension, radius: (1.0 / dimension.unit_ball_volume()).powf(1.0 / d) }
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Eigenvalue of the degree-l block.
    pub fn eigenvalue_of_degree(&self, l: u32) -> f64 {
        l as f64 / self.radius
    }

    /// Number of eigenvalues in the degree-l block.
    pub fn multiplicity(&self, l: u32) -> usize {
        match self.dimension {
            Dimension::Three => 2 * l as usize + 1,
            Dimension::Four => (l as usize + 1) * (l as usize + 1),
        }
    }

    /// Harmonic degree of the block containing sigma_k.
    pub fn degree_of_index(&self, k: usize) -> u32 {
        let mut l = 0;
        let mut covered = self.multiplicity(0);
        while covered <= k {
            l += 1;
            covered += self.multiplicity(l);
        }
        l
    }

    /// Index range [start, end) occupied by the degree-l block.
    pub fn block_range(&self, l: u32) -> std::ops::Range<usize> {
        let start: usize = (0..l).map(|j| self.multiplicity(j)).sum();
        start..start + self.multiplicity(l)
    }

    /// First `count` eigenvalues sigma_0, sigma_1, ... with multiplicity.
    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let mut l = 0;
        while out.len() < count {
            let sigma = self.eigenvalue_of_degree(l);
            for _ in 0..self.multiplicity(l) {
                out.push(sigma);
                if out.len() == count {
                    break;
                }
            }
            l += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_volume_values() {
        let b3 = BallOracle::unit_volume(Dimension::Three);
        // sigma_1 of the unit-volume 3D ball is (4 pi / 3)^(1/3).
        let expect = (4.0 * std::f64::consts::PI / 3.0).powf(1.0 / 3.0);
        assert!((b3.eigenvalue_of_degree(1) - expect).abs() < 1e-14);
        assert!((b3.eigenvalue_of_degree(1) - 1.611_991_954_016_469_6).abs() < 1e-12);

        let b4 = BallOracle::unit_volume(Dimension::Four);
        let expect4 = (std::f64::consts::PI * std::f64::consts::PI / 2.0).powf(0.25);
        assert!((b4.eigenvalue_of_degree(1) - expect4).abs() < 1e-14);
        assert!((b4.eigenvalue_of_degree(1) - 1.490_450_089_429_090_2).abs() < 1e-12);
    }

    #[test]
    fn block_layout() {
        let b3 = BallOracle::unit_volume(Dimension::Three);
        // Cumulative multiplicities 1, 3, 5, 7 place k = 4..8 at l = 2 and
        // k = 15 at l = 3.
        assert_eq!(b3.degree_of_index(0), 0);
        assert_eq!(b3.degree_of_index(1), 1);
        assert_eq!(b3.degree_of_index(4), 2);
        assert_eq!(b3.degree_of_index(7), 2);
        assert_eq!(b3.degree_of_index(9), 3);
        assert_eq!(b3.degree_of_index(15), 3);
        assert_eq!(b3.block_range(2), 4..9);
        // sigma_4 doubles sigma_1 on the ball: 2 (4 pi/3)^(1/3) = 3.224.
        let evs = b3.eigenvalues(16);
        assert!((evs[4] - 3.223_983_908_032_939).abs() < 1e-12);
        assert!((evs[15] - 3.0 * evs[1]).abs() < 1e-14);

        let b4 = BallOracle::unit_volume(Dimension::Four);
        assert_eq!(b4.multiplicity(1), 4);
        assert_eq!(b4.multiplicity(2), 9);
        assert_eq!(b4.block_range(1), 1..5);
        assert_eq!(b4.block_range(2), 5..14);
        assert_eq!(b4.degree_of_index(13), 2);
        assert_eq!(b4.degree_of_index(14), 3);
    }
}
