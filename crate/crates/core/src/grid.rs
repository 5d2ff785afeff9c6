use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `x_k = -L + k*dx`, `k = 0..N`, with `dx = 2L/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    half_width: f64,
    points: usize,
    spacing: f64,
}

impl UniformGrid {
    pub const DEFAULT_HALF_WIDTH: f64 = 40.0;
    pub const DEFAULT_POINTS: usize = 1 << 15;

    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !points.is_power_of_two() || points < 16 {
            return Err(Error::Config(format!("grid point count must be a power of two >= 16, got {points}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!("grid half-width must be positive and finite, got {half_width}")));
        }
        Ok(Self { half_width, points, spacing: 2.0 * half_width / points as f64 })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.points).map(move |k| self.node(k))
    }

    /// The grid of `xi_j = pi*j/L`, `j = -N/2..N/2`, on which transforms are sampled.
    pub fn dual(&self) -> Self {
        let spacing = std::f64::consts::PI / self.half_width;
        Self { half_width: spacing * (self.points / 2) as f64, points: self.points, spacing }
    }

    /// The window `[-0.9L, 0.9L]` where off-grid evaluation is trusted.
    pub fn safe_window(&self) -> (f64, f64) {
        (-0.9 * self.half_width, 0.9 * self.half_width)
    }

    pub fn check_in_safe_window(&self, what: &'static str, value: f64) -> Result<()> {
        let (lo, hi) = self.safe_window();
        if value.is_finite() && value >= lo && value <= hi {
            Ok(())
        } else {
            Err(Error::Range { what, value, lo, hi })
        }
    }
}

impl Default for UniformGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_HALF_WIDTH, Self::DEFAULT_POINTS).expect("default grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(UniformGrid::new(10.0, 100).is_err());
        assert!(UniformGrid::new(10.0, 8).is_err());
        assert!(UniformGrid::new(-1.0, 64).is_err());
        assert!(UniformGrid::new(10.0, 64).is_ok());
    }

    #[test]
    fn spacing_times_points_is_full_width() {
        let g = UniformGrid::new(40.0, 1 << 15).unwrap();
        assert_eq!(g.spacing() * g.len() as f64, 80.0);
        assert_eq!(g.node(0), -40.0);
        assert_eq!(g.node(g.len() / 2), 0.0);
    }

    #[test]
    fn dual_grid_nodes() {
        let g = UniformGrid::new(20.0, 64).unwrap();
        let d = g.dual();
        assert!((d.node(32)).abs() < 1e-15);
        assert!((d.node(33) - std::f64::consts::PI / 20.0).abs() < 1e-15);
        assert!((d.node(0) + 32.0 * std::f64::consts::PI / 20.0).abs() < 1e-12);
    }
}
