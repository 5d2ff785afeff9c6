//! The spectral density `ρ^{v,w}(α,λ)` of a rank-one model, its Breit–Wigner
//! rescaling and spectral concentration near the resonance.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{boundary_function, RankOneModel};
use crate::model1d::Profile1D;
use crate::pv::{principal_value, PrincipalValueResult};
use crate::quad;
use crate::resonance::{solve_resonance, ResonancePoint};
use crate::sampled::SampledFunction;

/// The `α`-independent data of a pair of states `(v, w)`: the pointwise
/// pairings `v·w̄`, `v·ū`, `u·w̄` on the energy line and their principal
/// values.
#[derive(Debug, Clone)]
pub struct SpectralPairing {
    vw: SampledFunction,
    vu: SampledFunction,
    uw: SampledFunction,
    gamma_vu: PrincipalValueResult,
    gamma_uw: PrincipalValueResult,
    inner_vw: Complex64,
    projection: Complex64,
    eigenvector: bool,
}

impl SpectralPairing {
    /// `projection` is `⟨P_{λ₀}v,w⟩ = ⟨v,φ⟩⟨φ,w⟩/‖φ‖²`.
    pub fn new(
        vw: SampledFunction,
        vu: SampledFunction,
        uw: SampledFunction,
        inner_vw: Complex64,
        projection: Complex64,
    ) -> Result<Self> {
        let gamma_vu = principal_value(&vu)?;
        let gamma_uw = principal_value(&uw)?;
        Ok(Self { vw, vu, uw, gamma_vu, gamma_uw, inner_vw, projection, eigenvector: false })
    }

    pub fn from_profile(profile: &Profile1D, v: &SampledFunction, w: &SampledFunction) -> Result<Self> {
        use crate::model::RankOneModel as _;
        let u = profile.u();
        let phi = profile.phi();
        Self::new(
            v.mul_conj(w),
            v.mul_conj(u),
            u.mul_conj(w),
            v.inner(w),
            v.inner(phi) * phi.inner(w) / profile.phi_norm_sq(),
        )
    }

    /// The eigenvector pairing `v = w = φ`.
    pub fn eigenvector(profile: &Profile1D) -> Result<Self> {
        Ok(Self::from_profile(profile, profile.phi(), profile.phi())?.mark_eigenvector())
    }

    /// Records that `v = w = φ`, which enables the sojourn lower bound.
    pub fn mark_eigenvector(mut self) -> Self {
        self.eigenvector = true;
        self
    }

    pub fn is_eigenvector(&self) -> bool {
        self.eigenvector
    }

    pub fn inner_vw(&self) -> Complex64 {
        self.inner_vw
    }

    pub fn projection(&self) -> Complex64 {
        self.projection
    }

    pub fn vw(&self) -> &SampledFunction {
        &self.vw
    }
}

/// `ρ^{v,w}(α,·)` for a fixed coupling `α ≠ α₀`.
#[derive(Debug, Clone, Copy)]
pub struct DensityField<'a, M: RankOneModel + ?Sized> {
    model: &'a M,
    pairing: &'a SpectralPairing,
    alpha: f64,
    resonance: Option<ResonancePoint>,
}

impl<'a, M: RankOneModel + ?Sized> DensityField<'a, M> {
    pub fn new(model: &'a M, pairing: &'a SpectralPairing, alpha: f64) -> Result<Self> {
        let alpha0 = model.alpha0();
        if (alpha - alpha0).abs() <= 1e-14 * alpha0.abs() {
            return Err(Error::NotAbsolutelyContinuous { alpha0 });
        }
        let resonance = solve_resonance(model, alpha).ok().filter(|r| r.kappa > 0.0);
        Ok(Self { model, pairing, alpha, resonance })
    }

    pub fn model(&self) -> &'a M {
        self.model
    }

    pub fn pairing(&self) -> &'a SpectralPairing {
        self.pairing
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `λ(α)` and `κ(α)` when the coupling lies in the resonance window.
    pub fn resonance(&self) -> Option<ResonancePoint> {
        self.resonance
    }

    pub fn density(&self, lambda: f64) -> Result<Complex64> {
        self.model.check_energy(lambda)?;
        Ok(self.density_unchecked(lambda))
    }

    pub(crate) fn density_unchecked(&self, lambda: f64) -> Complex64 {
        let p = self.pairing;
        let vw = p.vw.eval(lambda);
        if self.alpha == 0.0 {
            return vw;
        }
        let vu = p.vu.eval(lambda);
        let uw = p.uw.eval(lambda);
        let gvu = p.gamma_vu.eval(lambda);
        let guw = p.gamma_uw.eval(lambda);
        let f = match &self.resonance {
            Some(r) => r.boundary_function(self.model, lambda),
            None => boundary_function(self.model, self.alpha, lambda),
        };
        let s = self.alpha / f.norm_sqr();
        vw - s * f.re * (vu * guw + gvu * uw) + s * f.im * (gvu * guw / PI - PI * vu * uw)
    }

    /// Nodes at which an adaptive rule should split `[a, b]`: the resonance
    /// centre and its neighbours at distances `κ·10^k`.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        if let Some(r) = self.resonance {
            let mut d = r.kappa;
            pts.push(r.lambda);
            while d < b - a {
                pts.push(r.lambda - d);
                pts.push(r.lambda + d);
                d *= 10.0;
            }
        }
        pts.retain(|&x| x > a && x < b);
        pts
    }

    /// `∫_a^b ρ dλ` by adaptive Gauss–Kronrod split at the resonance.
    pub fn integrate(&self, a: f64, b: f64, rel_tol: f64) -> Result<Complex64> {
        let bp = self.breakpoints(a, b);
        Ok(quad::integrate(|x| self.density_unchecked(x), a, b, &bp, rel_tol, 1e-14)?.value)
    }

    /// Total spectral mass `∫ρ^{v,w}`, equal to `⟨v,w⟩` off `α₀`.
    pub fn total_mass(&self) -> Result<Complex64> {
        let (a, b) = self.model.energy_window();
        self.integrate(a, b, 1e-9)
    }
}

/// One cell of a Breit–Wigner scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BreitWignerRow {
    pub alpha: f64,
    pub h: f64,
    pub kappa: f64,
    pub lambda_h: f64,
    pub kappa_rho: Complex64,
    pub target: Complex64,
    pub abs_error: f64,
}

/// `(1/π)⟨P_{λ₀}v,w⟩/(h²+1)`.
pub fn breit_wigner_target(pairing: &SpectralPairing, h: f64) -> Complex64 {
    pairing.projection / (PI * (h * h + 1.0))
}

/// `κ(α)ρ^{v,w}(α,λ_h(α))` for every `(α, h)`, ordered by `α` then `h`.
pub fn breit_wigner_scan<M: RankOneModel + ?Sized>(
    model: &M,
    pairing: &SpectralPairing,
    hs: &[f64],
    alphas: &[f64],
) -> Result<Vec<BreitWignerRow>> {
    let cells: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| hs.iter().map(move |&h| (a, h))).collect();
    cells
        .par_iter()
        .map(|&(alpha, h)| {
            let field = DensityField::new(model, pairing, alpha)?;
            let r = solve_resonance(model, alpha)?;
            let lambda_h = r.lambda_h(h);
            let kappa_rho = r.kappa * field.density(lambda_h)?;
            let target = breit_wigner_target(pairing, h);
            Ok(BreitWignerRow {
                alpha,
                h,
                kappa: r.kappa,
                lambda_h,
                kappa_rho,
                target,
                abs_error: (kappa_rho - target).norm(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConcentrationReport {
    pub alpha: f64,
    pub kappa: f64,
    /// Half-width `κ^{r/2n}` of `J_α`.
    pub half_width: f64,
    /// `⟨E_α(J_α)φ,φ⟩`.
    pub mass: f64,
}

/// `∫_{J_α} ρ^{φ,φ}(α,λ) dλ` on `J_α = [λ(α)-κ^{r/2n}, λ(α)+κ^{r/2n}]`.
pub fn concentration_mass<M: RankOneModel + ?Sized>(
    model: &M,
    eigenvector: &SpectralPairing,
    alpha: f64,
    r_exponent: f64,
) -> Result<ConcentrationReport> {
    let two_n = 2.0 * model.vanishing_order() as f64;
    if !(r_exponent > 0.0 && r_exponent < two_n) {
        return Err(Error::Precondition(format!("r must lie in (0, {two_n}), got {r_exponent}")));
    }
    let field = DensityField::new(model, eigenvector, alpha)?;
    let res = solve_resonance(model, alpha)?;
    let half_width = res.kappa.powf(r_exponent / two_n);
    let (wlo, whi) = model.energy_window();
    let a = (res.lambda - half_width).max(wlo);
    let b = (res.lambda + half_width).min(whi);
    let mass = field.integrate(a, b, 1e-8)?.re;
    Ok(ConcentrationReport { alpha, kappa: res.kappa, half_width, mass })
}
