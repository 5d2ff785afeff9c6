//! The resonance curve `λ(α)`, the width `κ(α)` and the scaling limits of `F`
//! along `λ_h(α) = λ(α) + hκ(α)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{boundary_function, RankOneModel};

const BRACKET_RADIUS: f64 = 0.5;
const ROOT_TOL: f64 = 1e-12;

/// One point on the resonance curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonancePoint {
    pub alpha: f64,
    pub lambda: f64,
    pub kappa: f64,
}

/// Below this distance from `λ(α)`, `F₁` is integrated from its root
/// instead of formed as `1 + αγ`, which cancels to a few ulps of 1.
const NEAR_ROOT: f64 = 1e-3;

impl ResonancePoint {
    /// `λ_h(α) = λ(α) + hκ(α)`.
    pub fn lambda_h(&self, h: f64) -> f64 {
        self.lambda + h * self.kappa
    }

    /// `F(α,λ)` with `F₁` taken as `α∫_{λ(α)}^λ ∂γ` near the root.
    pub fn boundary_function<M: RankOneModel + ?Sized>(&self, model: &M, lambda: f64) -> Complex64 {
        let d = lambda - self.lambda;
        if d.abs() >= NEAR_ROOT {
            return boundary_function(model, self.alpha, lambda);
        }
        const X: f64 = 0.774_596_669_241_483_4; // sqrt(3/5)
        let mid = self.lambda + 0.5 * d;
        let g = |t: f64| model.coupling_pv_derivative(mid + 0.5 * d * t);
        let slope = (5.0 * g(-X) + 8.0 * g(0.0) + 5.0 * g(X)) / 18.0;
        Complex64::new(self.alpha * d * slope, self.alpha * PI * model.coupling_weight(lambda))
    }
}

/// Finds the zero of `λ ↦ F₁(α,λ)` closest to `λ₀` within radius 0.5, and
/// `κ(α) = π|u(λ(α))|²/‖φ‖²` there.
pub fn solve_resonance<M: RankOneModel + ?Sized>(model: &M, alpha: f64) -> Result<ResonancePoint> {
    let lambda0 = model.lambda0();
    let (wlo, whi) = model.energy_window();
    let f1 = |x: f64| 1.0 + alpha * model.coupling_pv(x);
    let not_bracketed = || Error::ResonanceNotBracketed { alpha, radius: BRACKET_RADIUS };

    let f0 = f1(lambda0);
    if f0 == 0.0 {
        return Ok(point(model, alpha, lambda0));
    }
    // Grow the bracket outward from λ₀ so the root nearest λ₀ is taken.
    let (mut prev_lo, mut prev_hi) = (lambda0, lambda0);
    let mut r = 1e-6;
    let (a, b) = loop {
        let lo = (lambda0 - r).max(wlo);
        let hi = (lambda0 + r).min(whi);
        if f1(lo).signum() != f0.signum() {
            break (lo, prev_lo);
        }
        if f1(hi).signum() != f0.signum() {
            break (prev_hi, hi);
        }
        if r >= BRACKET_RADIUS {
            return Err(not_bracketed());
        }
        (prev_lo, prev_hi) = (lo, hi);
        r = (2.0 * r).min(BRACKET_RADIUS);
    };
    let lambda = refine_root(f1, a, b, f1(a), f1(b)).ok_or_else(not_bracketed)?;
    Ok(point(model, alpha, lambda))
}

fn point<M: RankOneModel + ?Sized>(model: &M, alpha: f64, lambda: f64) -> ResonancePoint {
    ResonancePoint { alpha, lambda, kappa: PI * model.coupling_weight(lambda) / model.phi_norm_sq() }
}

/// Bisection to a short bracket, then Illinois-safeguarded secant steps.
fn refine_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..30 {
        if (b - a).abs() < 1e-6 {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            (a, fa) = (m, fm);
        } else {
            (b, fb) = (m, fm);
        }
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc.abs() < ROOT_TOL || (b - a).abs() <= 4.0 * f64::EPSILON * c.abs().max(1.0) {
            return Some(c);
        }
        if fc.signum() == fa.signum() {
            (a, fa) = (c, fc);
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            (b, fb) = (c, fc);
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Some(if fa.abs() < fb.abs() { a } else { b })
}

/// `λ(α)` and `κ(α)` on a coupling window `J = [α₀-r, α₀+r]` on which the
/// bracketed solve succeeds at both ends.
#[derive(Debug, Clone, Copy)]
pub struct ResonanceCurve<'a, M: RankOneModel + ?Sized> {
    model: &'a M,
    window: (f64, f64),
}

impl<'a, M: RankOneModel + ?Sized> ResonanceCurve<'a, M> {
    /// Starts from `r = 0.3|α₀|` and halves until both ends are bracketed.
    pub fn discover(model: &'a M) -> Result<Self> {
        let alpha0 = model.alpha0();
        let mut r = 0.3 * alpha0.abs();
        for _ in 0..40 {
            if solve_resonance(model, alpha0 - r).is_ok() && solve_resonance(model, alpha0 + r).is_ok() {
                log::debug!("resonance window radius {r}");
                return Ok(Self { model, window: (alpha0 - r, alpha0 + r) });
            }
            r *= 0.5;
        }
        Err(Error::ResonanceNotBracketed { alpha: alpha0, radius: BRACKET_RADIUS })
    }

    pub fn model(&self) -> &'a M {
        self.model
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn contains(&self, alpha: f64) -> bool {
        alpha >= self.window.0 && alpha <= self.window.1
    }

    pub fn at(&self, alpha: f64) -> Result<ResonancePoint> {
        if !self.contains(alpha) {
            return Err(Error::ResonanceNotBracketed { alpha, radius: BRACKET_RADIUS });
        }
        solve_resonance(self.model, alpha)
    }
}

/// `α₀ + sign·base^{-k}` for each exponent `k` and each requested sign.
pub fn detuned_alphas(alpha0: f64, exponents: &[i32], base: f64, signs: &[f64]) -> Vec<f64> {
    exponents.iter().flat_map(|&k| signs.iter().map(move |&s| alpha0 + s * base.powi(-k))).collect()
}

/// `[α₀+δ₁, α₀-δ₁, α₀+δ₂, α₀-δ₂, …]`.
pub fn symmetric_detunings(alpha0: f64, deltas: &[f64]) -> Vec<f64> {
    deltas.iter().flat_map(|&d| [alpha0 + d, alpha0 - d]).collect()
}

/// Worst error at each `|α-α₀|` for values laid out as by
/// [`symmetric_detunings`].
pub fn worst_per_detuning(errors: &[f64]) -> Vec<f64> {
    errors.chunks(2).map(|c| c.iter().fold(0.0f64, |m, e| m.max(e.abs()))).collect()
}

/// Each error below its predecessor, except that errors at or below `floor`
/// count as converged.
pub fn strictly_decreasing(errors: &[f64], floor: f64) -> bool {
    errors.windows(2).all(|w| w[1] < w[0] || w[1] <= floor)
}

/// Ratios of `F` at `λ_h(α)` whose limits as `α → α₀` are known.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaledFRow {
    pub alpha: f64,
    pub h: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub f1_over_kappa: f64,
    pub f2_over_kappa: f64,
    pub kappa_f1_over_abs2: f64,
    pub kappa_f2_over_abs2: f64,
}

/// Limits of the four [`ScaledFRow`] ratios, in the same order.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaledFTargets {
    pub f1_over_kappa: f64,
    pub f2_over_kappa: f64,
    pub kappa_f1_over_abs2: f64,
    pub kappa_f2_over_abs2: f64,
}

impl ScaledFRow {
    pub fn max_error(&self, t: &ScaledFTargets) -> f64 {
        [
            self.f1_over_kappa - t.f1_over_kappa,
            self.f2_over_kappa - t.f2_over_kappa,
            self.kappa_f1_over_abs2 - t.kappa_f1_over_abs2,
            self.kappa_f2_over_abs2 - t.kappa_f2_over_abs2,
        ]
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
    }
}

pub fn scaled_f_targets<M: RankOneModel + ?Sized>(model: &M, h: f64) -> ScaledFTargets {
    let a = model.alpha0() * model.phi_norm_sq();
    ScaledFTargets {
        f1_over_kappa: h * a,
        f2_over_kappa: a,
        kappa_f1_over_abs2: h / (h * h + 1.0) / a,
        kappa_f2_over_abs2: 1.0 / (h * h + 1.0) / a,
    }
}

pub fn scaled_f_limits<M: RankOneModel + ?Sized>(model: &M, h: f64, alphas: &[f64]) -> Result<Vec<ScaledFRow>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            if alpha == model.alpha0() {
                return Err(Error::Precondition("scaled limits need alpha != alpha0".into()));
            }
            let p = solve_resonance(model, alpha)?;
            let lh = p.lambda_h(h);
            model.check_energy(lh)?;
            let f = p.boundary_function(model, lh);
            let k = p.kappa;
            Ok(ScaledFRow {
                alpha,
                h,
                lambda: p.lambda,
                kappa: k,
                f1_over_kappa: f.re / k,
                f2_over_kappa: f.im / k,
                kappa_f1_over_abs2: k * f.re / f.norm_sqr(),
                kappa_f2_over_abs2: k * f.im / f.norm_sqr(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid;
    use crate::model1d::{build_hermite_profile, Profile1D};

    fn p1() -> Profile1D {
        build_hermite_profile(1.0, 1, 0.0, UniformGrid::default()).unwrap()
    }

    #[test]
    fn fixed_point_at_alpha0() {
        let p = p1();
        let r = solve_resonance(&p, p.alpha0()).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-8);
        assert!(r.kappa.abs() < 1e-12);
    }

    #[test]
    fn stable_f_agrees_with_direct_form() {
        let p = p1();
        let r = solve_resonance(&p, p.alpha0() + 0.05).unwrap();
        assert_eq!(r.boundary_function(&p, r.lambda).re, 0.0);
        for d in [1e-6, 1e-5, 1e-4, 9e-4, -5e-4] {
            let a = r.boundary_function(&p, r.lambda + d);
            let b = boundary_function(&p, r.alpha, r.lambda + d);
            assert!((a - b).norm() < 5e-8 * d.abs() + ROOT_TOL, "d={d}: {a} {b}");
        }
    }

    #[test]
    fn slope_at_alpha0() {
        let p = p1();
        let d = 1e-4;
        let a = solve_resonance(&p, p.alpha0() + d).unwrap().lambda;
        let b = solve_resonance(&p, p.alpha0() - d).unwrap().lambda;
        let slope = (a - b) / (2.0 * d);
        assert!((slope - 2.0 / 3.0).abs() < 1e-6, "{slope}");
    }

    #[test]
    fn root_residual_on_log_sweep() {
        let p = p1();
        let curve = ResonanceCurve::discover(&p).unwrap();
        for alpha in detuned_alphas(p.alpha0(), &[1, 2, 3, 4, 5, 6], 10.0, &[-1.0, 1.0]) {
            let r = curve.at(alpha).unwrap();
            assert!((1.0 + alpha * p.coupling_pv(r.lambda)).abs() < 1e-10);
            assert!(r.kappa > 0.0);
            assert!((r.lambda - 1.0).abs() <= (alpha - p.alpha0()).abs());
        }
    }

    #[test]
    fn kappa_order_matches_vanishing_order() {
        for n in [1u32, 2] {
            let p = build_hermite_profile(1.0, n, 0.0, UniformGrid::default()).unwrap();
            let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3]
                .iter()
                .map(|d| solve_resonance(&p, p.alpha0() + d).unwrap().kappa / d.powi(2 * n as i32))
                .collect();
            let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
            assert!(hi / lo < 3.0, "n={n}: {ratios:?}");
        }
    }

    #[test]
    fn outside_window_is_not_bracketed() {
        let p = p1();
        assert!(matches!(solve_resonance(&p, -50.0), Err(Error::ResonanceNotBracketed { .. })));
        let curve = ResonanceCurve::discover(&p).unwrap();
        assert!(curve.at(p.alpha0() + 10.0).is_err());
    }

    #[test]
    fn scaled_f_converges_monotonically() {
        let p = p1();
        for h in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let t = scaled_f_targets(&p, h);
            let alphas = symmetric_detunings(p.alpha0(), &[1e-1, 1e-2, 1e-3]);
            let rows = scaled_f_limits(&p, h, &alphas).unwrap();
            let errs = worst_per_detuning(&rows.iter().map(|r| r.max_error(&t)).collect::<Vec<_>>());
            assert!(strictly_decreasing(&errs, 0.0), "h={h}: {errs:?}");
            assert!(errs[2] < 1e-2, "h={h}: {errs:?}");
        }
    }

    #[test]
    fn detuning_helpers() {
        assert_eq!(symmetric_detunings(1.0, &[0.5, 0.25]), vec![1.5, 0.5, 1.25, 0.75]);
        assert_eq!(worst_per_detuning(&[0.1, -0.3, 0.2, 0.05]), vec![0.3, 0.2]);
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0], 0.0));
        assert!(!strictly_decreasing(&[3.0, 3.0], 0.0));
        assert!(strictly_decreasing(&[0.0, 0.0], 1e-14));
    }

    #[test]
    fn p1_scaled_targets() {
        let p = p1();
        let t0 = scaled_f_targets(&p, 0.0);
        assert!((t0.f2_over_kappa - 1.0).abs() < 1e-8);
        assert_eq!(t0.f1_over_kappa, 0.0);
        let t1 = scaled_f_targets(&p, 1.0);
        assert!((t1.kappa_f1_over_abs2 - 0.5).abs() < 1e-8);
        assert!((t1.kappa_f2_over_abs2 - 0.5).abs() < 1e-8);
    }
}
