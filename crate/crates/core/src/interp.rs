//! Four-point Lagrange interpolation on uniform grids.

use std::ops::{Add, Mul};

use crate::grid::UniformGrid;

/// Interpolates `values` (sampled on `grid`) at `x`, clamping the stencil at
/// the ends of the grid.
pub fn cubic<T>(grid: &UniformGrid, values: &[T], x: f64) -> T
where
    T: Copy + Mul<f64, Output = T> + Add<Output = T>,
{
    let (k, w) = stencil(grid, x);
    values[k] * w[0] + values[k + 1] * w[1] + values[k + 2] * w[2] + values[k + 3] * w[3]
}

/// Derivative of the same cubic interpolant.
pub fn cubic_derivative<T>(grid: &UniformGrid, values: &[T], x: f64) -> T
where
    T: Copy + Mul<f64, Output = T> + Add<Output = T>,
{
    let (k, w) = stencil_derivative(grid, x);
    values[k] * w[0] + values[k + 1] * w[1] + values[k + 2] * w[2] + values[k + 3] * w[3]
}

fn base(grid: &UniformGrid, x: f64) -> (usize, f64) {
    let n = grid.len();
    let pos = (x - grid.node(0)) / grid.spacing();
    let i = (pos.floor() as isize).clamp(1, n as isize - 3) as usize;
    // stencil nodes i-1, i, i+1, i+2; t measured from node i
    (i - 1, pos - i as f64)
}

fn stencil(grid: &UniformGrid, x: f64) -> (usize, [f64; 4]) {
    let (k, t) = base(grid, x);
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    (k, w)
}

fn stencil_derivative(grid: &UniformGrid, x: f64) -> (usize, [f64; 4]) {
    let (k, t) = base(grid, x);
    let h = grid.spacing();
    let w = [
        -(3.0 * t * t - 6.0 * t + 2.0) / 6.0 / h,
        (3.0 * t * t - 4.0 * t - 1.0) / 2.0 / h,
        -(3.0 * t * t - 2.0 * t - 2.0) / 2.0 / h,
        (3.0 * t * t - 1.0) / 6.0 / h,
    ];
    (k, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_cubics() {
        let g = UniformGrid::new(2.0, 64).unwrap();
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.3 * x * x * x;
        let dp = |x: f64| -2.0 + x - 0.9 * x * x;
        let v: Vec<f64> = g.nodes().map(p).collect();
        for &x in &[-1.77, -0.013, 0.0, 0.4999, 1.61] {
            assert!((cubic(&g, &v, x) - p(x)).abs() < 1e-12);
            assert!((cubic_derivative(&g, &v, x) - dp(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn reproduces_nodes() {
        let g = UniformGrid::new(3.0, 32).unwrap();
        let v: Vec<f64> = g.nodes().map(f64::sin).collect();
        for k in 2..30 {
            assert!((cubic(&g, &v, g.node(k)) - v[k]).abs() < 1e-14);
        }
    }
}
