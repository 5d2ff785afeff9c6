//! The rank-one perturbed Laplacian in `ℝ³`, written in the representation
//! `L²([0,∞), L²(S²))` where `H₀` is multiplication by `λ` and `u_λ` is
//! expanded in spherical harmonics.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::SpectralPairing;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::model::{boundary_function, RankOneModel};
use crate::pv::{principal_value, PrincipalValueResult};
use crate::resonance::solve_resonance;
use crate::sampled::SampledFunction;
use crate::sph;

/// One active `(l, m)` channel: `c_lm(λ) = d·(λ-λ₀)ⁿ·e^{-sλ-1/(sλ)}` before
/// normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub l: u32,
    pub m: i32,
    pub weight: f64,
    pub scale: f64,
}

impl Channel {
    /// Weight 1 and scale `1 + k/4` for the `k`-th active channel.
    pub fn default_for(l: u32, m: i32, k: usize) -> Self {
        Self { l, m, weight: 1.0, scale: 1.0 + 0.25 * k as f64 }
    }

    fn radial(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-self.scale * x - 1.0 / (self.scale * x)).exp()
        }
    }

    fn radial_log_derivative(&self, x: f64) -> f64 {
        -self.scale + 1.0 / (self.scale * x * x)
    }
}

#[derive(Debug, Clone)]
pub struct Profile3D {
    lambda0: f64,
    lmax: u32,
    order: u32,
    channels: Vec<Channel>,
    norm: f64,
    grid: UniformGrid,
    coeffs: Vec<SampledFunction>,
    phi_coeffs: Vec<SampledFunction>,
    norm_check: f64,
    alpha0: f64,
    phi_norm_sq: f64,
    gamma_w: PrincipalValueResult,
    gamma_dw: PrincipalValueResult,
}

/// Builds the normalized profile on the nonnegative half of `grid`.
pub fn build_profile3d(
    lambda0: f64,
    lmax: u32,
    order: u32,
    channels: &[Channel],
    grid: UniformGrid,
) -> Result<Profile3D> {
    if !(lambda0 > 0.0) {
        return Err(Error::Config(format!("lambda0 must be positive, got {lambda0}")));
    }
    if order == 0 {
        return Err(Error::Config("vanishing order must be positive".into()));
    }
    if channels.is_empty() {
        return Err(Error::Config("at least one active (l, m) channel is required".into()));
    }
    for (k, c) in channels.iter().enumerate() {
        if c.l > lmax || c.m.unsigned_abs() > c.l {
            return Err(Error::Config(format!("channel ({}, {}) outside lmax = {lmax}", c.l, c.m)));
        }
        if !(c.scale > 0.0) || !c.weight.is_finite() || c.weight == 0.0 {
            return Err(Error::Config(format!("channel ({}, {}) needs a positive scale and nonzero weight", c.l, c.m)));
        }
        if channels[..k].iter().any(|d| (d.l, d.m) == (c.l, c.m)) {
            return Err(Error::Config(format!("channel ({}, {}) listed twice", c.l, c.m)));
        }
    }
    let (_, hi) = grid.safe_window();
    if lambda0 >= hi {
        return Err(Error::Range { what: "lambda0", value: lambda0, lo: 0.0, hi });
    }

    let raw: Vec<SampledFunction> = channels
        .iter()
        .map(|&c| {
            SampledFunction::from_real_fn(grid, move |x| c.weight * (x - lambda0).powi(order as i32) * c.radial(x))
        })
        .collect::<Result<_>>()?;
    let mass: f64 = raw.iter().map(|f| f.norm_sq()).sum();
    let norm = 1.0 / mass.sqrt();

    let coeffs = channels
        .iter()
        .map(|&c| {
            SampledFunction::from_real_fn(grid, move |x| {
                norm * c.weight * (x - lambda0).powi(order as i32) * c.radial(x)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let phi_coeffs = channels
        .iter()
        .map(|&c| {
            SampledFunction::from_real_fn(grid, move |x| {
                norm * c.weight * (x - lambda0).powi(order as i32 - 1) * c.radial(x)
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let chans = channels.to_vec();
    let weight_fn = move |x: f64| weight_at(&chans, norm, lambda0, order, x);
    let chans = channels.to_vec();
    let dweight_fn = move |x: f64| weight_derivative_at(&chans, norm, lambda0, order, x);
    let gamma_w = principal_value(&SampledFunction::from_real_fn(grid, weight_fn)?)?;
    let gamma_dw = principal_value(&SampledFunction::from_real_fn(grid, dweight_fn)?)?;

    let g0 = gamma_w.eval(lambda0).re;
    if !(g0 < -1e-10) {
        return Err(Error::DegenerateProfile(format!(
            "gamma(<<u,u>>, lambda0) = {g0:e} must be negative for a positive alpha0"
        )));
    }
    let norm_check = coeffs.iter().map(|c| c.norm_sq()).sum::<f64>().sqrt();
    let phi_norm_sq = phi_coeffs.iter().map(|c| c.norm_sq()).sum();
    let profile = Profile3D {
        lambda0,
        lmax,
        order,
        channels: channels.to_vec(),
        norm,
        grid,
        coeffs,
        phi_coeffs,
        norm_check,
        alpha0: -1.0 / g0,
        phi_norm_sq,
        gamma_w,
        gamma_dw,
    };
    profile.check_invariants()?;
    Ok(profile)
}

fn weight_at(chans: &[Channel], norm: f64, lambda0: f64, order: u32, x: f64) -> f64 {
    let p = (x - lambda0).powi(2 * order as i32);
    chans.iter().map(|c| (norm * c.weight * c.radial(x)).powi(2)).sum::<f64>() * p
}

fn weight_derivative_at(chans: &[Channel], norm: f64, lambda0: f64, order: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let d = x - lambda0;
    let n = order as i32;
    chans
        .iter()
        .map(|c| {
            let r = norm * c.weight * c.radial(x);
            // (dⁿr)' = dⁿ⁻¹r(n + d·r'/r)
            let val = d.powi(n) * r;
            let der = d.powi(n - 1) * r * (n as f64 + d * c.radial_log_derivative(x));
            2.0 * val * der
        })
        .sum()
}

impl Profile3D {
    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn norm_check(&self) -> f64 {
        self.norm_check
    }

    pub fn coeffs(&self) -> &[SampledFunction] {
        &self.coeffs
    }

    pub fn phi_coeffs(&self) -> &[SampledFunction] {
        &self.phi_coeffs
    }

    /// `c_lm(λ)` of the `k`-th active channel.
    pub fn coeff(&self, k: usize, lambda: f64) -> f64 {
        let c = &self.channels[k];
        self.norm * c.weight * (lambda - self.lambda0).powi(self.order as i32) * c.radial(lambda)
    }

    /// `d^j c_lm/dλ^j` at `λ₀` for `j = order`, the first nonvanishing one.
    fn leading_derivative_at_lambda0(&self, k: usize) -> f64 {
        let c = &self.channels[k];
        let fact: f64 = (1..=self.order).map(f64::from).product();
        self.norm * c.weight * fact * c.radial(self.lambda0)
    }

    fn first_derivative_at_lambda0(&self, k: usize) -> f64 {
        if self.order == 1 {
            self.leading_derivative_at_lambda0(k)
        } else {
            0.0
        }
    }

    /// `u_λ` as a vector in the full `(lmax+1)²` harmonic basis.
    pub fn u_vector(&self, lambda: f64) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); sph::basis_len(self.lmax)];
        for (k, c) in self.channels.iter().enumerate() {
            v[sph::index(c.l, c.m)] = Complex64::new(self.coeff(k, lambda), 0.0);
        }
        v
    }

    /// `u_λ(ω) = Σ c_lm(λ) Y_lm(ω)`.
    pub fn u_at_direction(&self, lambda: f64, omega: [f64; 3]) -> Complex64 {
        self.channels.iter().enumerate().map(|(k, c)| self.coeff(k, lambda) * sph::ylm_at(c.l, c.m, omega)).sum()
    }

    fn check_invariants(&self) -> Result<()> {
        let fail = |what: String| Err(Error::DegenerateProfile(what));
        if (self.norm_check.powi(2) - 1.0).abs() >= 1e-7 {
            return fail(format!("‖u‖² = {}", self.norm_check.powi(2)));
        }
        for k in 0..self.channels.len() {
            if self.coeff(k, self.lambda0).abs() >= 1e-8 {
                return fail(format!("channel {k} does not vanish at lambda0"));
            }
        }
        let g = self.coupling_pv(self.lambda0);
        if (1.0 + self.alpha0 * g).abs() >= 1e-8 {
            return fail(format!("1 + alpha0*gamma = {:e}", 1.0 + self.alpha0 * g));
        }
        let nodes: Vec<f64> = self.grid.nodes().filter(|&x| x > 0.0).collect();
        let (first, last) = (nodes[0], *nodes.last().unwrap());
        let (w0, w1) = (self.coupling_weight(first), self.coupling_weight(last));
        if w0 >= 1e-12 || w1 >= 1e-12 {
            return fail(format!("<<u,u>> not decayed at the grid ends: {w0:e}, {w1:e}"));
        }
        let peak = nodes.iter().map(|&x| self.coupling_weight(x)).fold(0.0, f64::max);
        let spacing = self.grid.spacing();
        for &x in &nodes {
            if (x - self.lambda0).abs() > spacing && x > 0.1 && x < 20.0 && self.coupling_weight(x) <= 1e-300 * peak {
                return fail(format!("<<u,u>> vanishes at {x}"));
            }
        }
        Ok(())
    }

    /// A state given by its harmonic coefficient functions on the active
    /// channels, each extended by zero to `λ ≤ 0`.
    pub fn state<F>(&self, f: F) -> Result<Vec<SampledFunction>>
    where
        F: Fn(usize, f64) -> Complex64 + Send + Sync + Clone + 'static,
    {
        (0..self.channels.len())
            .map(|k| {
                let f = f.clone();
                SampledFunction::from_fn(self.grid, move |x| if x > 0.0 { f(k, x) } else { Complex64::new(0.0, 0.0) })
            })
            .collect()
    }

    /// Pairing data for `⟨⟨v_λ, w_λ⟩⟩` summed over active channels.
    pub fn pairing(&self, v: &[SampledFunction], w: &[SampledFunction]) -> Result<SpectralPairing> {
        let n = self.channels.len();
        if v.len() != n || w.len() != n {
            return Err(Error::Config(format!("states must have {n} channel coefficients")));
        }
        let sum = |a: &[SampledFunction], b: &[SampledFunction]| -> SampledFunction {
            let mut acc = a[0].mul_conj(&b[0]);
            for k in 1..n {
                acc = a[k].mul_conj(&b[k]).axpy(Complex64::new(1.0, 0.0), &acc);
            }
            acc
        };
        let inner = |a: &[SampledFunction], b: &[SampledFunction]| -> Complex64 {
            a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
        };
        let phi = &self.phi_coeffs;
        let projection = inner(v, phi) * inner(phi, w) / self.phi_norm_sq;
        SpectralPairing::new(sum(v, w), sum(v, &self.coeffs), sum(&self.coeffs, w), inner(v, w), projection)
    }

    pub fn eigenvector_pairing(&self) -> Result<SpectralPairing> {
        Ok(self.pairing(&self.phi_coeffs, &self.phi_coeffs)?.mark_eigenvector())
    }
}

impl RankOneModel for Profile3D {
    fn lambda0(&self) -> f64 {
        self.lambda0
    }

    fn alpha0(&self) -> f64 {
        self.alpha0
    }

    fn phi_norm_sq(&self) -> f64 {
        self.phi_norm_sq
    }

    fn coupling_weight(&self, lambda: f64) -> f64 {
        weight_at(&self.channels, self.norm, self.lambda0, self.order, lambda)
    }

    fn coupling_weight_derivative(&self, lambda: f64) -> f64 {
        weight_derivative_at(&self.channels, self.norm, self.lambda0, self.order, lambda)
    }

    fn coupling_pv(&self, lambda: f64) -> f64 {
        self.gamma_w.eval(lambda).re
    }

    fn coupling_pv_derivative(&self, lambda: f64) -> f64 {
        self.gamma_dw.eval(lambda).re
    }

    fn vanishing_order(&self) -> u32 {
        self.order
    }

    fn energy_window(&self) -> (f64, f64) {
        (0.0, self.grid.safe_window().1)
    }
}

/// `S_λ = I - (2πiα/G)⟨⟨·,u_λ⟩⟩u_λ` on the `(lmax+1)²` harmonic coefficients.
#[derive(Debug, Clone)]
pub struct ScatteringOperator3D {
    pub lambda: f64,
    pub g: Complex64,
    pub matrix: DMatrix<Complex64>,
}

impl ScatteringOperator3D {
    /// `‖S*S - I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        (self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(n, n)).norm()
    }

    pub fn determinant(&self) -> Complex64 {
        self.matrix.clone().determinant()
    }

    /// Product of the eigenvalues from a complex Schur form.
    pub fn eigenvalue_product(&self) -> Option<Complex64> {
        self.matrix.clone().schur().eigenvalues().map(|e| e.iter().product())
    }

    /// Singular values of `S - I` in decreasing order.
    pub fn deviation_singular_values(&self) -> Vec<f64> {
        let n = self.matrix.nrows();
        let d = &self.matrix - DMatrix::<Complex64>::identity(n, n);
        let mut s: Vec<f64> = d.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// `R_λ = S_λ - I`.
    pub fn r(&self) -> DMatrix<Complex64> {
        let n = self.matrix.nrows();
        &self.matrix - DMatrix::<Complex64>::identity(n, n)
    }
}

fn rank_one(profile: &Profile3D, lambda: f64, coeff: Complex64) -> DMatrix<Complex64> {
    let u = profile.u_vector(lambda);
    let n = u.len();
    DMatrix::from_fn(n, n, |i, j| coeff * u[i] * u[j].conj())
}

fn scattering_with_g(profile: &Profile3D, alpha: f64, lambda: f64, g: Complex64) -> ScatteringOperator3D {
    let coeff = -Complex64::new(0.0, 2.0 * PI * alpha) / g;
    let n = sph::basis_len(profile.lmax);
    let matrix = DMatrix::<Complex64>::identity(n, n) + rank_one(profile, lambda, coeff);
    ScatteringOperator3D { lambda, g, matrix }
}

fn checked_g(profile: &Profile3D, alpha: f64, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::Range { what: "lambda", value: lambda, lo: 0.0, hi: profile.energy_window().1 });
    }
    profile.check_energy(lambda)?;
    let g = boundary_function(profile, alpha, lambda);
    if g.norm() < 1e-10 {
        return Err(Error::SingularBoundaryPoint { lambda, modulus: g.norm(), tol: 1e-10 });
    }
    Ok(g)
}

pub fn scattering_operator3d(profile: &Profile3D, alpha: f64, lambda: f64) -> Result<ScatteringOperator3D> {
    let g = checked_g(profile, alpha, lambda)?;
    Ok(scattering_with_g(profile, alpha, lambda, g))
}

/// `σ̄(λ) = πλ⁻¹‖R_λ‖²_HS`.
pub fn cross_section(profile: &Profile3D, alpha: f64, lambda: f64) -> Result<f64> {
    let s = scattering_operator3d(profile, alpha, lambda)?;
    Ok(PI / lambda * s.r().norm_squared())
}

/// `f(λ; ω₀ → ω) = -2πiλ^{-1/2} R_λ(ω, ω₀)` with the kernel
/// `R_λ(ω,ω₀) = -(2πiα/G) u_λ(ω) conj(u_λ(ω₀))`.
pub fn amplitude(profile: &Profile3D, alpha: f64, lambda: f64, omega0: [f64; 3], omega: [f64; 3]) -> Result<Complex64> {
    let g = checked_g(profile, alpha, lambda)?;
    Ok(amplitude_with_g(profile, alpha, lambda, g, omega0, omega))
}

fn amplitude_with_g(
    profile: &Profile3D,
    alpha: f64,
    lambda: f64,
    g: Complex64,
    omega0: [f64; 3],
    omega: [f64; 3],
) -> Complex64 {
    let kernel = -Complex64::new(0.0, 2.0 * PI * alpha) / g
        * profile.u_at_direction(lambda, omega)
        * profile.u_at_direction(lambda, omega0).conj();
    -Complex64::new(0.0, 2.0 * PI) / lambda.sqrt() * kernel
}

/// `ζ(λ) = -2(G₁∂G₂ - G₂∂G₁)/|G|²`.
pub fn time_delay_3d(profile: &Profile3D, alpha: f64, lambda: f64) -> Result<f64> {
    checked_g(profile, alpha, lambda)?;
    crate::scattering1d::Scattering::new(profile, alpha).time_delay(lambda)
}

/// The unit direction `e(λ₀) = u'_{λ₀}/|||u'_{λ₀}|||` in the harmonic basis.
pub fn resonance_direction(profile: &Profile3D) -> Result<Vec<Complex64>> {
    direction(profile, |k| profile.first_derivative_at_lambda0(k)).ok_or_else(|| {
        Error::HypothesisViolated(format!("u'(lambda0) = 0 because u vanishes to order {} at lambda0", profile.order))
    })
}

/// The direction of the first nonvanishing derivative `u^{(n)}_{λ₀}`.
pub fn leading_direction(profile: &Profile3D) -> Vec<Complex64> {
    direction(profile, |k| profile.leading_derivative_at_lambda0(k)).expect("leading derivative is nonzero")
}

fn direction(profile: &Profile3D, d: impl Fn(usize) -> f64) -> Option<Vec<Complex64>> {
    let mut v = vec![Complex64::new(0.0, 0.0); sph::basis_len(profile.lmax)];
    for (k, c) in profile.channels.iter().enumerate() {
        v[sph::index(c.l, c.m)] = Complex64::new(d(k), 0.0);
    }
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n < 1e-10 {
        return None;
    }
    Some(v.into_iter().map(|z| z / n).collect())
}

/// `‖u''‖_∞` over the energy window, the constant in the rate of the
/// Hilbert–Schmidt limit.
pub fn second_derivative_bound(profile: &Profile3D) -> f64 {
    let h = 1e-3;
    let (_, hi) = profile.energy_window();
    profile
        .grid
        .nodes()
        .filter(|&x| x > h && x < hi - h)
        .map(|x| {
            (0..profile.channels.len())
                .map(|k| {
                    let d2 = (profile.coeff(k, x + h) - 2.0 * profile.coeff(k, x) + profile.coeff(k, x - h)) / (h * h);
                    d2 * d2
                })
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HsLimitRow {
    pub alpha: f64,
    pub h: f64,
    pub kappa: f64,
    /// `‖R_{λ_h(α)} + (2i/(h+i))⟨⟨·,e⟩⟩e‖_HS`.
    pub hs_error: f64,
    /// `‖R_{λ_h(α)}‖_HS`.
    pub hs_norm: f64,
}

pub fn r_hs_limit(profile: &Profile3D, h: f64, alphas: &[f64]) -> Result<Vec<HsLimitRow>> {
    let e = resonance_direction(profile)?;
    let n = e.len();
    let coeff = -Complex64::new(0.0, 2.0) / Complex64::new(h, 1.0);
    let target = DMatrix::from_fn(n, n, |i, j| coeff * e[i] * e[j].conj());
    alphas
        .par_iter()
        .map(|&alpha| {
            let p = solve_resonance(profile, alpha)?;
            let x = p.lambda_h(h);
            profile.check_energy(x)?;
            let s = scattering_with_g(profile, alpha, x, p.boundary_function(profile, x));
            let r = s.r();
            Ok(HsLimitRow { alpha, h, kappa: p.kappa, hs_error: (&r - &target).norm(), hs_norm: r.norm() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossSectionRow {
    pub alpha: f64,
    pub h: f64,
    pub kappa: f64,
    pub sigma: f64,
    pub target: f64,
    pub abs_error: f64,
}

/// `σ̄(λ_h(α))` against `(4π/λ₀)/(h²+1)`.
pub fn cross_section_scan(profile: &Profile3D, h: f64, alphas: &[f64]) -> Result<Vec<CrossSectionRow>> {
    let target = 4.0 * PI / profile.lambda0 / (h * h + 1.0);
    alphas
        .par_iter()
        .map(|&alpha| {
            let p = solve_resonance(profile, alpha)?;
            let x = p.lambda_h(h);
            profile.check_energy(x)?;
            let s = scattering_with_g(profile, alpha, x, p.boundary_function(profile, x));
            let sigma = PI / x * s.r().norm_squared();
            Ok(CrossSectionRow { alpha, h, kappa: p.kappa, sigma, target, abs_error: (sigma - target).abs() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AmplitudeRow {
    pub alpha: f64,
    pub h: f64,
    pub amplitude: Complex64,
    pub target: Complex64,
    pub abs_error: f64,
}

/// `f(λ_h(α); ω₀ → ω)` against
/// `-(4π/√λ₀)u'(ω)conj(u'(ω₀))/|||u'|||²·1/(h+i)`.
pub fn amplitude_scan(
    profile: &Profile3D,
    h: f64,
    omega0: [f64; 3],
    omega: [f64; 3],
    alphas: &[f64],
) -> Result<Vec<AmplitudeRow>> {
    let e = resonance_direction(profile)?;
    let at = |w: [f64; 3]| -> Complex64 {
        profile.channels.iter().map(|c| e[sph::index(c.l, c.m)] * sph::ylm_at(c.l, c.m, w)).sum()
    };
    let target = -4.0 * PI / profile.lambda0.sqrt() * at(omega) * at(omega0).conj() / Complex64::new(h, 1.0);
    alphas
        .par_iter()
        .map(|&alpha| {
            let p = solve_resonance(profile, alpha)?;
            let x = p.lambda_h(h);
            profile.check_energy(x)?;
            let a = amplitude_with_g(profile, alpha, x, p.boundary_function(profile, x), omega0, omega);
            Ok(AmplitudeRow { alpha, h, amplitude: a, target, abs_error: (a - target).norm() })
        })
        .collect()
}
