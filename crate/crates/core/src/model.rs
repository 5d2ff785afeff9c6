//! What the resonance, density and scattering machinery needs to know about
//! a rank-one model `H_α = H₀ + α⟨·,u⟩u` in its spectral representation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A rank-one perturbation diagonalized so that `H₀` acts as multiplication
/// by `λ`, with `u` vanishing at the embedded eigenvalue `λ₀` of `H_{α₀}`.
pub trait RankOneModel: Send + Sync {
    fn lambda0(&self) -> f64;
    fn alpha0(&self) -> f64;
    /// `‖φ‖²` for the eigenvector `φ = u/(λ-λ₀)`.
    fn phi_norm_sq(&self) -> f64;
    /// `|u(λ)|²` (or `|||u_λ|||²` for vector-valued profiles).
    fn coupling_weight(&self, lambda: f64) -> f64;
    fn coupling_weight_derivative(&self, lambda: f64) -> f64;
    /// `γ(|u|², λ)`.
    fn coupling_pv(&self, lambda: f64) -> f64;
    /// `∂_λ γ(|u|², λ) = γ((|u|²)', λ)`.
    fn coupling_pv_derivative(&self, lambda: f64) -> f64;
    /// Order to which `u` vanishes at `λ₀`.
    fn vanishing_order(&self) -> u32;
    /// Closed interval of energies where the model is evaluated.
    fn energy_window(&self) -> (f64, f64);

    fn check_energy(&self, lambda: f64) -> Result<()> {
        let (lo, hi) = self.energy_window();
        if lambda.is_finite() && lambda >= lo && lambda <= hi {
            Ok(())
        } else {
            Err(Error::Range { what: "lambda", value: lambda, lo, hi })
        }
    }
}

/// `F(α,λ) = 1 + α⟨R₀(λ+i0)u,u⟩ = F₁ + iF₂` with `F₁ = 1 + αγ(|u|²,λ)` and
/// `F₂ = απ|u(λ)|²`.
pub fn boundary_function<M: RankOneModel + ?Sized>(model: &M, alpha: f64, lambda: f64) -> Complex64 {
    Complex64::new(
        1.0 + alpha * model.coupling_pv(lambda),
        alpha * std::f64::consts::PI * model.coupling_weight(lambda),
    )
}

/// `(∂F₁/∂λ, ∂F₂/∂λ)` packed as a complex number.
pub fn boundary_function_derivative<M: RankOneModel + ?Sized>(model: &M, alpha: f64, lambda: f64) -> Complex64 {
    Complex64::new(
        alpha * model.coupling_pv_derivative(lambda),
        alpha * std::f64::consts::PI * model.coupling_weight_derivative(lambda),
    )
}
