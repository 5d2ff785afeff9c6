//! Brute-force reference: the collocation matrix
//! `H = diag(x_k) + αΔ·u(x_j)u(x_k)` diagonalized densely, with spectral
//! measures, evolution and smoothed densities taken from its eigenpairs.

use std::f64::consts::PI;

use faer::{Col, Mat};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::model1d::Profile1D;

pub const MAX_ORACLE_POINTS: usize = 8192;
/// Half-width of the oracle's energy interval.
pub const ORACLE_HALF_WIDTH: f64 = 10.0;

pub struct OracleModel {
    grid: UniformGrid,
    alpha: f64,
    rank_one_trace: f64,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

impl std::fmt::Debug for OracleModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleModel").field("grid", &self.grid).field("alpha", &self.alpha).finish_non_exhaustive()
    }
}

/// Assembles and diagonalizes `H_α` on `N_o` nodes of `[-10, 10)`.
pub fn build_oracle(profile: &Profile1D, alpha: f64, points: usize) -> Result<OracleModel> {
    if points > MAX_ORACLE_POINTS {
        return Err(Error::Config(format!("oracle size {points} exceeds {MAX_ORACLE_POINTS}")));
    }
    let grid = UniformGrid::new(ORACLE_HALF_WIDTH, points)?;
    let x: Vec<f64> = grid.nodes().collect();
    let u: Vec<f64> = x.iter().map(|&t| profile.u_at(t)).collect();
    let d = grid.spacing();
    let h = Mat::<f64>::from_fn(points, points, |i, j| alpha * d * u[i] * u[j] + if i == j { x[i] } else { 0.0 });
    let evd = h.selfadjoint_eigendecomposition(faer::Side::Lower);
    let eigenvalues: Vec<f64> = (0..points).map(|i| evd.s().column_vector().read(i)).collect();
    if eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numeric("dense eigensolver returned non-finite eigenvalues".into()));
    }
    let eigenvectors = evd.u().to_owned();
    Ok(OracleModel {
        grid,
        alpha,
        rank_one_trace: alpha * d * u.iter().map(|v| v * v).sum::<f64>(),
        eigenvalues,
        eigenvectors,
    })
}

impl OracleModel {
    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `trace(αΔuuᵀ)`.
    pub fn rank_one_trace(&self) -> f64 {
        self.rank_one_trace
    }

    /// `‖UᵀU - I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.eigenvectors.as_ref();
        let n = u.nrows();
        let g = u.transpose() * u - Mat::<f64>::identity(n, n);
        g.norm_l2()
    }

    /// Spectral measure of `v`: the eigenvalues with weights `|⟨v,ψ_k⟩|²`
    /// in the `L²` inner product.
    pub fn measure<F>(&self, v: F) -> OracleMeasure
    where
        F: Fn(f64) -> Complex64,
    {
        let n = self.grid.len();
        let samples: Vec<Complex64> = self.grid.nodes().map(v).collect();
        let re = Col::<f64>::from_fn(n, |j| samples[j].re);
        let im = Col::<f64>::from_fn(n, |j| samples[j].im);
        let ut = self.eigenvectors.as_ref().transpose();
        let (cr, ci) = (ut * &re, ut * &im);
        let d = self.grid.spacing();
        let weights = (0..n).map(|k| d * (cr.read(k).powi(2) + ci.read(k).powi(2))).collect();
        OracleMeasure { eigenvalues: self.eigenvalues.clone(), weights, spacing: d }
    }
}

/// Discrete spectral measure `Σ_k w_k δ(λ - e_k)` of one state.
#[derive(Debug, Clone)]
pub struct OracleMeasure {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
}

impl OracleMeasure {
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_k w_k e^{-it e_k}`.
    pub fn survival(&self, t: f64) -> Complex64 {
        self.eigenvalues.iter().zip(&self.weights).map(|(e, w)| w * Complex64::new(0.0, -t * e).exp()).sum()
    }

    pub fn survival_many(&self, ts: &[f64]) -> Vec<Complex64> {
        ts.par_iter().map(|&t| self.survival(t)).collect()
    }

    /// `(1/π)Im⟨R(λ+iη)v,v⟩ = Σ_k w_k (η/π)/((λ-e_k)²+η²)`.
    pub fn smoothed_density(&self, lambda: f64, eta: f64) -> Result<f64> {
        if !(eta >= 5.0 * self.spacing) {
            return Err(Error::Resolution(format!(
                "smoothing width {eta} is below 5 grid spacings ({})",
                5.0 * self.spacing
            )));
        }
        Ok(self
            .eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * eta / PI / ((lambda - e).powi(2) + eta * eta))
            .sum())
    }

    /// `∫_{-T}^{T}|a(t)|²dt` by Simpson's rule with `2n` panels per half-line.
    pub fn truncated_sojourn(&self, t_max: f64, n: usize) -> f64 {
        let dt = t_max / (2 * n) as f64;
        let s: f64 = (0..=2 * n)
            .into_par_iter()
            .map(|j| {
                let w = if j == 0 || j == 2 * n {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * self.survival(j as f64 * dt).norm_sqr()
            })
            .sum();
        // |a(-t)| = |a(t)| for a real measure
        2.0 * s * dt / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{DensityField, SpectralPairing};
    use crate::dynamics::survival_at;
    use crate::model::RankOneModel;
    use crate::model1d::build_hermite_profile;
    use crate::quad;
    use crate::resonance::solve_resonance;

    fn p1() -> Profile1D {
        build_hermite_profile(1.0, 1, 0.0, UniformGrid::default()).unwrap()
    }

    #[test]
    fn structural_identities() {
        let p = p1();
        let o0 = build_oracle(&p, 0.0, 512).unwrap();
        let nodes: Vec<f64> = o0.grid().nodes().collect();
        assert!(o0.eigenvalues().iter().zip(&nodes).all(|(e, x)| (e - x).abs() < 1e-12));

        let alpha = 1.7;
        let o = build_oracle(&p, alpha, 512).unwrap();
        assert!(o.unitarity_defect() < 1e-10);
        let tr: f64 = o.eigenvalues().iter().sum::<f64>() - nodes.iter().sum::<f64>();
        assert!((tr - o.rank_one_trace()).abs() < 1e-9);
        assert!((o.rank_one_trace() - alpha).abs() < 1e-8);
        for (k, e) in o.eigenvalues().iter().enumerate() {
            assert!((e - nodes[k]).abs() <= alpha + 1e-12);
            assert!(*e >= nodes[k] - 1e-12);
            if k + 1 < nodes.len() {
                assert!(*e <= nodes[k + 1] + 1e-12);
            }
        }
        assert!(build_oracle(&p, 1.0, 16384).is_err());
    }

    #[test]
    fn unperturbed_evolution_and_mass() {
        let p = p1();
        let o = build_oracle(&p, 0.0, 1024).unwrap();
        let m = o.measure(|x| Complex64::new((-(x - 0.5f64).powi(2)).exp(), 0.0));
        assert!((m.mass() - (PI / 2.0).sqrt()).abs() < 1e-10);
        for t in [0.0f64, 1.0, 4.0, 9.0] {
            let want = (PI / 2.0).sqrt() * (-t * t / 8.0).exp() * Complex64::new(0.0, -t / 2.0).exp();
            assert!((m.survival(t) - want).norm() < 1e-4, "t={t}");
        }
        assert!(m.smoothed_density(0.0, o.grid().spacing()).is_err());
        let smooth =
            quad::integrate_real(|x| m.smoothed_density(x, 0.2).unwrap(), -200.0, 200.0, &[0.5], 1e-10, 0.0).unwrap();
        assert!((smooth - m.mass()).abs() < 2e-3);
    }

    #[test]
    fn agrees_with_closed_form_density_and_evolution() {
        let p = p1();
        let alpha = p.alpha0() + 0.1;
        let o = build_oracle(&p, alpha, 2048).unwrap();
        let phi = p.phi().clone();
        let m = o.measure(|x| phi.eval(x));
        let pair = SpectralPairing::eigenvector(&p).unwrap();
        let field = DensityField::new(&p, &pair, alpha).unwrap();
        let eta = 0.05;
        let r = solve_resonance(&p, alpha).unwrap();
        for lam in [-1.0, 0.0, 0.5, r.lambda, 1.5, 2.5] {
            let conv = quad::integrate_real(
                |mu| field.density_unchecked(mu).re * eta / PI / ((lam - mu).powi(2) + eta * eta),
                -36.0,
                36.0,
                &[lam - eta, lam, lam + eta, r.lambda],
                1e-10,
                0.0,
            )
            .unwrap();
            let got = m.smoothed_density(lam, eta).unwrap();
            assert!((got - conv).abs() < 1e-3 * conv.abs().max(1e-2), "lambda={lam}: {got} {conv}");
        }
        let ts: Vec<f64> = (0..=50).map(f64::from).collect();
        let a = survival_at(&field, &ts).unwrap();
        let b = m.survival_many(&ts);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");
    }

    #[test]
    fn oracle_sojourn_exceeds_bound() {
        let p = p1();
        let phi = p.phi().clone();
        for d in [0.3, 0.5] {
            let alpha = p.alpha0() + d;
            let o = build_oracle(&p, alpha, 2048).unwrap();
            let m = o.measure(|x| phi.eval(x));
            let kappa = solve_resonance(&p, alpha).unwrap().kappa;
            let bound = p.phi_norm_sq().powi(2) / (4.0 * kappa);
            let tau = m.truncated_sojourn(500.0, 2000);
            assert!(tau > bound, "d={d}: {tau} {bound}");
        }
    }
}
