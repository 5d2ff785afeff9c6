//! The Friedrichs model `H_α = M_x + α⟨·,u⟩u` on `L²(ℝ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::model::{boundary_function, RankOneModel};
use crate::pv::{self, principal_value, principal_value_at, PrincipalValueResult, Side};
use crate::sampled::SampledFunction;

/// Shape of a Hermite–Gaussian profile `u(x) = c (x-λ₀)ⁿ e^{-(x-center)²/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteShape {
    pub lambda0: f64,
    pub order: u32,
    pub center: f64,
}

impl HermiteShape {
    fn raw(&self, x: f64) -> f64 {
        (x - self.lambda0).powi(self.order as i32) * (-(x - self.center).powi(2) / 2.0).exp()
    }

    fn raw_derivative(&self, x: f64) -> f64 {
        let n = self.order as i32;
        let d = x - self.lambda0;
        let g = (-(x - self.center).powi(2) / 2.0).exp();
        let lead = if n == 0 { 0.0 } else { n as f64 * d.powi(n - 1) };
        (lead - d.powi(n) * (x - self.center)) * g
    }

    /// `u(x)/(x-λ₀)` with the removable singularity filled in.
    fn raw_quotient(&self, x: f64) -> f64 {
        (x - self.lambda0).powi(self.order as i32 - 1) * (-(x - self.center).powi(2) / 2.0).exp()
    }
}

/// Normalized profile `u` together with the embedded-eigenvalue data it
/// determines: `α₀ = -1/γ(|u|²,λ₀)`, `φ = u/(x-λ₀)` and `‖φ‖²`.
#[derive(Debug, Clone)]
pub struct Profile1D {
    shape: HermiteShape,
    scale: f64,
    u: SampledFunction,
    phi: SampledFunction,
    norm_check: f64,
    alpha0: f64,
    phi_norm_sq: f64,
    gamma_uu: PrincipalValueResult,
    gamma_duu: PrincipalValueResult,
}

/// Builds the normalized Hermite–Gaussian profile on `grid`.
pub fn build_hermite_profile(lambda0: f64, order: u32, center: f64, grid: UniformGrid) -> Result<Profile1D> {
    if order == 0 {
        return Err(Error::Config("vanishing order must be positive".into()));
    }
    grid.check_in_safe_window("lambda0", lambda0)?;
    let shape = HermiteShape { lambda0, order, center };

    let raw = SampledFunction::from_real_fn(grid, move |x| shape.raw(x))?;
    let scale = 1.0 / raw.norm();
    let u = SampledFunction::from_real_fn(grid, move |x| scale * shape.raw(x))?;
    let phi = SampledFunction::from_real_fn(grid, move |x| scale * shape.raw_quotient(x))?;
    let weight = u.mul_conj(&u);
    let dweight =
        SampledFunction::from_real_fn(grid, move |x| 2.0 * scale * scale * shape.raw(x) * shape.raw_derivative(x))?;
    let gamma_uu = principal_value(&weight)?;
    let gamma_duu = principal_value(&dweight)?;

    let g0 = gamma_uu.eval(lambda0).re;
    if g0.abs() < 1e-10 {
        return Err(Error::DegenerateProfile(format!("gamma(|u|^2, lambda0) = {g0:e}; no finite alpha0 exists")));
    }
    let profile = Profile1D {
        shape,
        scale,
        norm_check: u.norm(),
        alpha0: -1.0 / g0,
        phi_norm_sq: phi.norm_sq(),
        u,
        phi,
        gamma_uu,
        gamma_duu,
    };
    profile.check_invariants()?;
    Ok(profile)
}

impl Profile1D {
    pub fn shape(&self) -> HermiteShape {
        self.shape
    }

    pub fn order(&self) -> u32 {
        self.shape.order
    }

    pub fn grid(&self) -> &UniformGrid {
        self.u.grid()
    }

    pub fn u(&self) -> &SampledFunction {
        &self.u
    }

    pub fn phi(&self) -> &SampledFunction {
        &self.phi
    }

    pub fn norm_check(&self) -> f64 {
        self.norm_check
    }

    /// Normalization constant `c`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn u_at(&self, x: f64) -> f64 {
        self.scale * self.shape.raw(x)
    }

    pub fn u_derivative_at(&self, x: f64) -> f64 {
        self.scale * self.shape.raw_derivative(x)
    }

    pub fn gamma_uu(&self) -> &PrincipalValueResult {
        &self.gamma_uu
    }

    fn check_invariants(&self) -> Result<()> {
        let fail = |what: String| Err(Error::DegenerateProfile(what));
        if (self.norm_check - 1.0).abs() >= 1e-8 {
            return fail(format!("‖u‖ = {} is not 1", self.norm_check));
        }
        let at_zero = self.u_at(self.shape.lambda0).abs();
        if at_zero >= 1e-8 {
            return fail(format!("|u(lambda0)| = {at_zero:e}"));
        }
        self.check_single_zero()?;
        let g = self.gamma_uu.eval(self.shape.lambda0).re;
        if (1.0 + self.alpha0 * g).abs() >= 1e-8 {
            return fail(format!("1 + alpha0*gamma = {:e}", 1.0 + self.alpha0 * g));
        }
        let quad = pv::pv_derivative_at_zero(&self.u, self.shape.lambda0, 1e-8)?;
        if (quad / self.phi_norm_sq - 1.0).abs() >= 1e-8 {
            return fail(format!("‖φ‖² = {} disagrees with ∫|u/(x-λ₀)|² = {quad}", self.phi_norm_sq));
        }
        Ok(())
    }

    /// Every sign change and every exact zero inside the numerical support
    /// must sit next to `λ₀`.
    fn check_single_zero(&self) -> Result<()> {
        let g = self.grid();
        let vals = self.u.values();
        let tiny = 1e-280;
        let near = |x: f64| (x - self.shape.lambda0).abs() <= 1.5 * g.spacing();
        for k in 1..vals.len() {
            let (a, b) = (vals[k - 1].re, vals[k].re);
            if a.abs() < tiny || b.abs() < tiny {
                let x = if a.abs() < tiny { g.node(k - 1) } else { g.node(k) };
                let inside =
                    vals[..k].iter().any(|v| v.re.abs() > 1e-12) && vals[k..].iter().any(|v| v.re.abs() > 1e-12);
                if inside && !near(x) {
                    return Err(Error::DegenerateProfile(format!("u vanishes at {x} as well")));
                }
            } else if a.signum() != b.signum() && !near(g.node(k)) && !near(g.node(k - 1)) {
                return Err(Error::DegenerateProfile(format!("u changes sign near {} away from lambda0", g.node(k))));
            }
        }
        Ok(())
    }

    /// `F(α,λ)` with `λ` checked against the safe window.
    pub fn eval_f(&self, alpha: f64, lambda: f64) -> Result<Complex64> {
        self.check_energy(lambda)?;
        Ok(boundary_function(self, alpha, lambda))
    }
}

impl RankOneModel for Profile1D {
    fn lambda0(&self) -> f64 {
        self.shape.lambda0
    }

    fn alpha0(&self) -> f64 {
        self.alpha0
    }

    fn phi_norm_sq(&self) -> f64 {
        self.phi_norm_sq
    }

    fn coupling_weight(&self, lambda: f64) -> f64 {
        self.u_at(lambda).powi(2)
    }

    fn coupling_weight_derivative(&self, lambda: f64) -> f64 {
        2.0 * self.u_at(lambda) * self.u_derivative_at(lambda)
    }

    fn coupling_pv(&self, lambda: f64) -> f64 {
        self.gamma_uu.eval(lambda).re
    }

    fn coupling_pv_derivative(&self, lambda: f64) -> f64 {
        self.gamma_duu.eval(lambda).re
    }

    fn vanishing_order(&self) -> u32 {
        self.shape.order
    }

    fn energy_window(&self) -> (f64, f64) {
        self.grid().safe_window()
    }
}

/// `⟨R₀(λ±i0)f,g⟩ = γ(f ḡ, λ) ± iπ f(λ) ḡ(λ)` for a precomputed product.
fn free_boundary(product: &SampledFunction, lambda: f64, side: Side) -> Complex64 {
    principal_value_at(product, lambda) + Complex64::new(0.0, side.sign() * PI) * product.eval(lambda)
}

/// `lim_{ε→0+} ⟨R_α(λ±iε)v,w⟩` by the rank-one resolvent formula.
pub fn resolvent_boundary_matrix_element(
    profile: &Profile1D,
    alpha: f64,
    lambda: f64,
    v: &SampledFunction,
    w: &SampledFunction,
    side: Side,
) -> Result<Complex64> {
    profile.check_energy(lambda)?;
    let u = profile.u();
    let f = boundary_function(profile, alpha, lambda);
    let f = if side == Side::Upper { f } else { f.conj() };
    const TOL: f64 = 1e-10;
    if f.norm() < TOL {
        return Err(Error::SingularBoundaryPoint { lambda, modulus: f.norm(), tol: TOL });
    }
    let vw = free_boundary(&v.mul_conj(w), lambda, side);
    if alpha == 0.0 {
        return Ok(vw);
    }
    let vu = free_boundary(&v.mul_conj(u), lambda, side);
    let uw = free_boundary(&u.mul_conj(w), lambda, side);
    Ok(vw - alpha * vu * uw / f)
}

/// Diagnostics for `(H_α - λ₀)φ = 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenpairReport {
    pub alpha: f64,
    /// `‖(x-λ₀)φ + α⟨φ,u⟩u‖ / ‖φ‖`
    pub relative_residual: f64,
    /// `⟨φ,u⟩` by quadrature.
    pub phi_u: f64,
    /// `γ(|u|²,λ₀)`, which `⟨φ,u⟩` must equal.
    pub gamma_at_lambda0: f64,
}

pub fn verify_eigenpair(profile: &Profile1D) -> EigenpairReport {
    verify_eigenpair_at(profile, profile.alpha0())
}

/// Same residual with the coupling replaced by `alpha`.
pub fn verify_eigenpair_at(profile: &Profile1D, alpha: f64) -> EigenpairReport {
    let lambda0 = profile.lambda0();
    let phi = profile.phi();
    let u = profile.u();
    let phi_u = phi.inner(u).re;
    let h = profile.grid().spacing();
    let res: f64 = profile
        .grid()
        .nodes()
        .zip(phi.values().iter().zip(u.values()))
        .map(|(x, (p, uu))| ((x - lambda0) * p.re + alpha * phi_u * uu.re).powi(2))
        .sum::<f64>()
        * h;
    EigenpairReport {
        alpha,
        relative_residual: res.sqrt() / phi.norm(),
        phi_u,
        gamma_at_lambda0: profile.coupling_pv(lambda0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> Profile1D {
        build_hermite_profile(1.0, 1, 0.0, UniformGrid::default()).unwrap()
    }

    #[test]
    fn p1_constants() {
        let p = p1();
        assert!((p.scale().powi(2) - 2.0 / (3.0 * PI.sqrt())).abs() < 1e-12);
        assert!((p.alpha0() - 1.5).abs() < 1e-9);
        assert!((p.phi_norm_sq() - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.coupling_pv(1.0) + 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_profile_is_degenerate() {
        let err = build_hermite_profile(0.0, 1, 0.0, UniformGrid::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateProfile(_)));
    }

    #[test]
    fn f_vanishes_at_embedded_eigenvalue() {
        let p = p1();
        assert!(p.eval_f(p.alpha0(), 1.0).unwrap().norm() < 1e-7);
        assert_eq!(p.eval_f(0.0, 0.3).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn f_tail_follows_principal_value_tail() {
        // γ(|u|²,λ) ~ -1/λ, so λ(F₁-1)/α → -1 and F₂ → 0
        let p = p1();
        for &lam in &[-35.0, 35.0] {
            let f = p.eval_f(0.8, lam).unwrap();
            assert!((lam * (f.re - 1.0) / 0.8 + 1.0).abs() < 2e-2);
            assert!(f.im.abs() < 1e-6);
        }
    }

    #[test]
    fn f2_is_positive_off_lambda0() {
        let p = p1();
        for x in p.grid().nodes().filter(|x| x.abs() < 20.0 && (x - 1.0).abs() > 1e-9) {
            assert!(p.eval_f(0.5, x).unwrap().im > 0.0, "x = {x}");
        }
    }

    #[test]
    fn eigenpair_residual() {
        let p = p1();
        let r = verify_eigenpair(&p);
        assert!(r.relative_residual < 1e-7);
        assert!((r.phi_u - r.gamma_at_lambda0).abs() < 1e-7);
        assert!((r.phi_u + 1.0 / p.alpha0()).abs() < 1e-7);

        let off = verify_eigenpair_at(&p, p.alpha0() + 0.1);
        let want = 0.1 * off.phi_u.abs() * p.u().norm() / p.phi().norm();
        assert!((off.relative_residual - want).abs() < 1e-6 * want);
    }

    #[test]
    fn residual_stable_under_refinement() {
        let coarse = build_hermite_profile(1.0, 1, 0.0, UniformGrid::new(40.0, 1 << 14).unwrap()).unwrap();
        let fine = p1();
        let a = verify_eigenpair(&coarse).relative_residual;
        let b = verify_eigenpair(&fine).relative_residual;
        assert!((a - b).abs() < 1e-7);
    }

    #[test]
    fn unperturbed_resolvent_is_free_boundary_value() {
        let p = p1();
        let v = SampledFunction::from_real_fn(*p.grid(), |x| (-(x - 0.2).powi(2)).exp()).unwrap();
        let r = resolvent_boundary_matrix_element(&p, 0.0, 0.4, &v, &v, Side::Upper).unwrap();
        let want = pv::plemelj_boundary_value(&v.mul_conj(&v), 0.4, Side::Upper).unwrap();
        assert!((r - want).norm() < 1e-14);
    }

    #[test]
    fn resolvent_sides_are_conjugate() {
        let p = p1();
        let v = p.phi().clone();
        let up = resolvent_boundary_matrix_element(&p, 1.2, 0.7, &v, &v, Side::Upper).unwrap();
        let lo = resolvent_boundary_matrix_element(&p, 1.2, 0.7, &v, &v, Side::Lower).unwrap();
        assert!((up - lo.conj()).norm() < 1e-13);
    }

    #[test]
    fn resolvent_is_singular_only_at_the_eigenvalue() {
        let p = p1();
        let phi = p.phi().clone();
        let err = resolvent_boundary_matrix_element(&p, p.alpha0(), 1.0, &phi, &phi, Side::Upper).unwrap_err();
        assert!(matches!(err, Error::SingularBoundaryPoint { .. }));
        let g = *p.grid();
        for k in (g.len() / 4..3 * g.len() / 4).step_by(257) {
            let r = resolvent_boundary_matrix_element(&p, 1.3, g.node(k), &phi, &phi, Side::Upper).unwrap();
            assert!(r.re.is_finite() && r.im.is_finite());
        }
    }
}
