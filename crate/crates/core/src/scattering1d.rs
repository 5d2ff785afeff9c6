//! Stationary scattering data of a rank-one model: `S = F̄/F`, `R = S-1`,
//! the spectral shift `ξ = arg F/π`, its derivative and the time delay
//! `-2πξ'`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{boundary_function, boundary_function_derivative, RankOneModel};
use crate::resonance::solve_resonance;

const SINGULAR_TOL: f64 = 1e-10;

/// Scattering quantities of `H_α` as functions of the energy.
#[derive(Debug, Clone, Copy)]
pub struct Scattering<'a, M: RankOneModel + ?Sized> {
    model: &'a M,
    alpha: f64,
}

impl<'a, M: RankOneModel + ?Sized> Scattering<'a, M> {
    pub fn new(model: &'a M, alpha: f64) -> Self {
        Self { model, alpha }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn f(&self, x: f64) -> Result<Complex64> {
        self.model.check_energy(x)?;
        let f = boundary_function(self.model, self.alpha, x);
        if f.norm() < SINGULAR_TOL {
            return Err(Error::SingularBoundaryPoint { lambda: x, modulus: f.norm(), tol: SINGULAR_TOL });
        }
        Ok(f)
    }

    /// `S(x) = conj(F)/F`.
    pub fn s(&self, x: f64) -> Result<Complex64> {
        let f = self.f(x)?;
        Ok(f.conj() / f)
    }

    /// `S(x) = 1 - 2πiα|u(x)|²/F`, the unsimplified form.
    pub fn s_from_weight(&self, x: f64) -> Result<Complex64> {
        let f = self.f(x)?;
        Ok(1.0 - Complex64::new(0.0, 2.0 * PI * self.alpha * self.model.coupling_weight(x)) / f)
    }

    /// `R(x) = S(x) - 1 = -2iF₂/F`.
    pub fn r(&self, x: f64) -> Result<Complex64> {
        let f = self.f(x)?;
        Ok(reflection(f))
    }

    /// `ξ(x) = arg F/π` on the principal branch, in `(-1, 1]`.
    pub fn xi(&self, x: f64) -> Result<f64> {
        Ok(self.f(x)?.arg() / PI)
    }

    pub fn xi_prime(&self, x: f64) -> Result<f64> {
        let f = self.f(x)?;
        Ok(xi_prime_from(f, boundary_function_derivative(self.model, self.alpha, x)))
    }

    /// `-2πξ'(x)`.
    pub fn time_delay(&self, x: f64) -> Result<f64> {
        Ok(-2.0 * PI * self.xi_prime(x)?)
    }

    /// `x, S, ξ, ξ', delay` at each energy.
    pub fn table(&self, xs: &[f64]) -> Result<Vec<ScatteringRow>> {
        xs.par_iter()
            .map(|&x| {
                let xi_prime = self.xi_prime(x)?;
                Ok(ScatteringRow { x, s: self.s(x)?, xi: self.xi(x)?, xi_prime, delay: -2.0 * PI * xi_prime })
            })
            .collect()
    }
}

fn reflection(f: Complex64) -> Complex64 {
    Complex64::new(0.0, -2.0 * f.im) / f
}

/// `(1/π)(F₁∂F₂ - F₂∂F₁)/|F|²`.
fn xi_prime_from(f: Complex64, df: Complex64) -> f64 {
    (f.re * df.im - f.im * df.re) / (PI * f.norm_sqr())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScatteringRow {
    pub x: f64,
    pub s: Complex64,
    pub xi: f64,
    pub xi_prime: f64,
    pub delay: f64,
}

/// `R(λ_h(α))` and `|R|²` against `-2i/(h+i)` and `4/(h²+1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReflectionRow {
    pub alpha: f64,
    pub h: f64,
    pub kappa: f64,
    pub r: Complex64,
    pub r_target: Complex64,
    pub abs2: f64,
    pub abs2_target: f64,
    pub r_error: f64,
    pub abs2_error: f64,
}

pub fn r_limit_scan<M: RankOneModel + ?Sized>(model: &M, h: f64, alphas: &[f64]) -> Result<Vec<ReflectionRow>> {
    let r_target = Complex64::new(0.0, -2.0) / Complex64::new(h, 1.0);
    let abs2_target = 4.0 / (h * h + 1.0);
    alphas
        .par_iter()
        .map(|&alpha| {
            let p = solve_resonance(model, alpha)?;
            let x = p.lambda_h(h);
            model.check_energy(x)?;
            let r = reflection(p.boundary_function(model, x));
            Ok(ReflectionRow {
                alpha,
                h,
                kappa: p.kappa,
                r,
                r_target,
                abs2: r.norm_sqr(),
                abs2_target,
                r_error: (r - r_target).norm(),
                abs2_error: (r.norm_sqr() - abs2_target).abs(),
            })
        })
        .collect()
}

/// `κξ'(λ_h(α))` against `-1/(π(h²+1))` and `κ·delay` against `2/(h²+1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShiftRow {
    pub alpha: f64,
    pub h: f64,
    pub kappa: f64,
    pub kappa_xi_prime: f64,
    pub xi_prime_target: f64,
    pub kappa_delay: f64,
    pub delay_target: f64,
    pub abs_error: f64,
}

pub fn spectral_shift_scan<M: RankOneModel + ?Sized>(model: &M, h: f64, alphas: &[f64]) -> Result<Vec<ShiftRow>> {
    let xi_prime_target = -1.0 / (PI * (h * h + 1.0));
    alphas
        .par_iter()
        .map(|&alpha| {
            let p = solve_resonance(model, alpha)?;
            let x = p.lambda_h(h);
            model.check_energy(x)?;
            let xp = xi_prime_from(p.boundary_function(model, x), boundary_function_derivative(model, alpha, x));
            let kappa_xi_prime = p.kappa * xp;
            Ok(ShiftRow {
                alpha,
                h,
                kappa: p.kappa,
                kappa_xi_prime,
                xi_prime_target,
                kappa_delay: -2.0 * PI * kappa_xi_prime,
                delay_target: -2.0 * PI * xi_prime_target,
                abs_error: (kappa_xi_prime - xi_prime_target).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid;
    use crate::model1d::{build_hermite_profile, Profile1D};
    use crate::resonance::{strictly_decreasing, symmetric_detunings, worst_per_detuning};
    use rand::{Rng, SeedableRng};

    fn p1() -> Profile1D {
        build_hermite_profile(1.0, 1, 0.0, UniformGrid::default()).unwrap()
    }

    fn alphas(p: &Profile1D) -> Vec<f64> {
        symmetric_detunings(p.alpha0(), &[1e-1, 1e-2, 1e-3])
    }

    #[test]
    fn trivial_cases() {
        let p = p1();
        let s0 = Scattering::new(&p, 0.0);
        assert_eq!(s0.s(0.4).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(s0.xi(0.4).unwrap(), 0.0);
        assert_eq!(s0.xi_prime(0.4).unwrap(), 0.0);
        assert_eq!(s0.time_delay(0.4).unwrap(), 0.0);
        let s = Scattering::new(&p, 0.8);
        assert_eq!(s.s(1.0).unwrap(), Complex64::new(1.0, 0.0));
        assert!(matches!(Scattering::new(&p, p.alpha0()).s(1.0), Err(Error::SingularBoundaryPoint { .. })));
    }

    #[test]
    fn unitarity_and_both_forms() {
        let p = p1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let alpha = rng.gen_range(-3.0..3.0);
            let x = rng.gen_range(-36.0..36.0);
            let sc = Scattering::new(&p, alpha);
            let (a, b) = (sc.s(x).unwrap(), sc.s_from_weight(x).unwrap());
            assert!((a.norm() - 1.0).abs() < 1e-10);
            assert!((a - b).norm() < 1e-10);
        }
        let edge = Scattering::new(&p, 1.3).s(36.0).unwrap();
        assert!((edge - 1.0).norm() < 1e-12);
    }

    #[test]
    fn reflection_limits() {
        let p = p1();
        for (h, r_t, a_t) in [(0.0, Complex64::new(-2.0, 0.0), 4.0), (1.0, Complex64::new(-1.0, -1.0), 2.0)] {
            let rows = r_limit_scan(&p, h, &alphas(&p)).unwrap();
            assert!((rows[0].r_target - r_t).norm() < 1e-15 && rows[0].abs2_target == a_t);
            let e = worst_per_detuning(&rows.iter().map(|r| r.r_error.max(r.abs2_error)).collect::<Vec<_>>());
            assert!(strictly_decreasing(&e, 1e-12) && e[2] < 1e-2, "h={h}: {e:?}");
        }
        let far = r_limit_scan(&p, 100.0, &alphas(&p)).unwrap();
        assert!((far[0].abs2_target - 4.0 / 10001.0).abs() < 1e-15);
        assert!(far[4].abs2_error < 1e-4);
    }

    #[test]
    fn xi_prime_matches_finite_difference() {
        let p = p1();
        for alpha in [-1.1, 0.6, 1.4, 2.2] {
            let sc = Scattering::new(&p, alpha);
            let d = 1e-4;
            let mut checked = 0;
            for k in 0..400 {
                let x = -6.0 + 0.03 * k as f64 + 0.0011;
                let xi = |t: f64| sc.xi(t).unwrap();
                let (a, b) = (xi(x + d), xi(x - d));
                if (a - b).abs() > 0.9 {
                    continue;
                }
                // Richardson-extrapolated central difference
                let coarse = (xi(x + 2.0 * d) - xi(x - 2.0 * d)) / (4.0 * d);
                let fd = (4.0 * (a - b) / (2.0 * d) - coarse) / 3.0;
                let xp = sc.xi_prime(x).unwrap();
                assert!((fd - xp).abs() < 1e-6 * (1.0 + xp.abs()), "alpha={alpha} x={x}: {fd} {xp}");
                checked += 1;
            }
            assert!(checked > 350);
        }
    }

    #[test]
    fn xi_range() {
        let p = p1();
        for alpha in [-2.5, -0.5, 0.5, 2.5] {
            let sc = Scattering::new(&p, alpha);
            for k in 0..200 {
                let xi = sc.xi(-10.0 + 0.1 * k as f64 + 0.013).unwrap();
                assert!(xi > -1.0 && xi <= 1.0);
                if alpha > 0.0 {
                    assert!(xi >= 0.0);
                }
            }
        }
    }

    #[test]
    fn spectral_shift_and_delay_limits() {
        let p = p1();
        for h in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let rows = spectral_shift_scan(&p, h, &alphas(&p)).unwrap();
            let e = worst_per_detuning(&rows.iter().map(|r| r.abs_error).collect::<Vec<_>>());
            assert!(strictly_decreasing(&e, 0.0) && e[2] < 1e-2, "h={h}: {e:?}");
            assert!((rows[4].kappa_delay - 2.0 / (h * h + 1.0)).abs() < 2e-2 * PI);
        }
        let r = solve_resonance(&p, p.alpha0() + 1e-3).unwrap();
        let sc = Scattering::new(&p, r.alpha);
        assert!(sc.time_delay(r.lambda).unwrap() > 0.0);
        let d = 1e-2 * r.kappa;
        assert!(sc.xi(r.lambda + d).unwrap() < sc.xi(r.lambda - d).unwrap());
    }
}
