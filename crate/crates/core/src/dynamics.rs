//! Survival amplitudes `⟨e^{-itH_α}v,w⟩ = ∫e^{-itλ}ρ^{v,w}(α,λ)dλ` and
//! sojourn times `τ = 2π∫|ρ|²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{DensityField, SpectralPairing};
use crate::error::{Error, Result};
use crate::model::RankOneModel;
use crate::quad;
use crate::resonance::solve_resonance;

/// Inverse sinh step; puts 64 nodes within `κ/2` of `λ(α)`.
const CORE_NODES: f64 = 128.0;
/// Largest step away from the resonance.
const MAX_STEP: f64 = 0.01;
const MAX_NODES: usize = 4_000_000;

/// `ρ` sampled on energy nodes graded toward `λ(α)`: `λ(α) + κ·sinh(s)` with
/// `ds = 1/128` until the step reaches `0.01`, uniform beyond.
#[derive(Debug, Clone)]
pub struct SpectralSamples {
    nodes: Vec<f64>,
    values: Vec<Complex64>,
    center: f64,
    kappa: Option<f64>,
}

impl SpectralSamples {
    pub fn new<M: RankOneModel + ?Sized>(field: &DensityField<'_, M>) -> Result<Self> {
        let (a, b) = field.model().energy_window();
        let (nodes, center, kappa) = match field.resonance() {
            Some(r) if r.lambda > a && r.lambda < b => {
                (graded_nodes(a, b, r.lambda, r.kappa)?, r.lambda, Some(r.kappa))
            }
            _ => (uniform_nodes(a, b, MAX_STEP), 0.5 * (a + b), None),
        };
        let values = nodes.par_iter().map(|&x| field.density_unchecked(x)).collect();
        Ok(Self { nodes, values, center, kappa })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `λ(α)` when the field has a resonance, else the middle of the window.
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn kappa(&self) -> Option<f64> {
        self.kappa
    }

    /// `∫e^{-iω(λ-c)}ρ(λ)dλ`.
    pub fn transform(&self, omega: f64, c: f64) -> Complex64 {
        quad::filon(&self.nodes, &self.values, omega, c).expect("sample count is odd by construction")
    }
}

fn uniform_nodes(a: f64, b: f64, step: f64) -> Vec<f64> {
    let mut n = ((b - a) / step).ceil() as usize;
    n += n % 2;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

fn graded_nodes(a: f64, b: f64, c: f64, kappa: f64) -> Result<Vec<f64>> {
    let ds = 1.0 / CORE_NODES;
    let s_max = (MAX_STEP / (kappa * ds)).max(1.0).acosh();
    let steps = (s_max / ds).floor();
    let required = 2.0 * steps + (b - a) / MAX_STEP;
    if !(kappa > 0.0) || !required.is_finite() || required > MAX_NODES as f64 {
        return Err(Error::Resolution(format!(
            "resolving a resonance of width {kappa:e} needs about {required:.0} energy nodes (limit {MAX_NODES})"
        )));
    }
    let steps = steps as usize;
    // one side of the graded core, excluding the centre
    let side: Vec<f64> = (1..=steps).map(|i| kappa * (i as f64 * ds).sinh()).collect();

    let mut left: Vec<f64> = side.iter().map(|d| c - d).filter(|&x| x > a).collect();
    left.reverse();
    let right: Vec<f64> = side.iter().map(|d| c + d).filter(|&x| x < b).collect();

    let mut nodes = Vec::with_capacity(required as usize + 8);
    let first = left.first().copied().unwrap_or(c);
    if first > a {
        nodes.extend(uniform_nodes(a, first, MAX_STEP));
        nodes.pop();
    }
    nodes.extend(left);
    nodes.push(c);
    nodes.extend(right);
    let last = *nodes.last().unwrap();
    if last < b {
        nodes.extend(uniform_nodes(last, b, MAX_STEP).into_iter().skip(1));
    }
    if nodes.len() % 2 == 0 {
        // split the widest gap to make the count odd
        let k =
            (1..nodes.len()).max_by(|&i, &j| (nodes[i] - nodes[i - 1]).total_cmp(&(nodes[j] - nodes[j - 1]))).unwrap();
        nodes.insert(k, 0.5 * (nodes[k - 1] + nodes[k]));
    }
    Ok(nodes)
}

/// `⟨e^{-itH_α}v,w⟩` on `t_j = j·t_max/(n_t-1)`.
#[derive(Debug, Clone, Serialize)]
pub struct SurvivalAmplitude {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

pub fn survival_amplitude<M: RankOneModel + ?Sized>(
    field: &DensityField<'_, M>,
    t_max: f64,
    n_t: usize,
) -> Result<SurvivalAmplitude> {
    if n_t < 2 || !(t_max > 0.0) {
        return Err(Error::Config("survival needs t_max > 0 and at least two times".into()));
    }
    let samples = SpectralSamples::new(field)?;
    let times: Vec<f64> = (0..n_t).map(|j| t_max * j as f64 / (n_t - 1) as f64).collect();
    let values = times.par_iter().map(|&t| samples.transform(t, 0.0)).collect();
    Ok(SurvivalAmplitude { alpha: field.alpha(), times, values })
}

/// Amplitudes at arbitrary times, sharing one spectral sampling.
pub fn survival_at<M: RankOneModel + ?Sized>(field: &DensityField<'_, M>, times: &[f64]) -> Result<Vec<Complex64>> {
    let samples = SpectralSamples::new(field)?;
    Ok(times.par_iter().map(|&t| samples.transform(t, 0.0)).collect())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaledSurvivalRow {
    pub alpha: f64,
    pub t: f64,
    pub kappa: f64,
    pub amplitude: Complex64,
    pub target: f64,
    pub abs_error: f64,
}

/// `⟨e^{-it(H_α-λ(α))/κ(α)}φ,φ⟩` against `‖φ‖²e^{-|t|}`, ordered by `α`
/// then `t`.
pub fn scaled_survival_limit<M: RankOneModel + ?Sized>(
    model: &M,
    eigenvector: &SpectralPairing,
    alphas: &[f64],
    ts: &[f64],
) -> Result<Vec<ScaledSurvivalRow>> {
    let norm = model.phi_norm_sq();
    let mut rows = Vec::with_capacity(alphas.len() * ts.len());
    for &alpha in alphas {
        let field = DensityField::new(model, eigenvector, alpha)?;
        let res = solve_resonance(model, alpha)?;
        let samples = SpectralSamples::new(&field)?;
        let cells: Vec<ScaledSurvivalRow> = ts
            .par_iter()
            .map(|&t| {
                let amplitude = samples.transform(t / res.kappa, res.lambda);
                let target = norm * (-t.abs()).exp();
                ScaledSurvivalRow {
                    alpha,
                    t,
                    kappa: res.kappa,
                    amplitude,
                    target,
                    abs_error: (amplitude - target).norm(),
                }
            })
            .collect();
        rows.extend(cells);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SojournReport {
    pub alpha: f64,
    /// `2π∫|ρ^{v,w}(α,λ)|²dλ`.
    pub tau: f64,
    pub kappa: Option<f64>,
    /// `‖φ‖⁴/(4κ(α))`, reported for the eigenvector pairing.
    pub lower_bound: Option<f64>,
    /// `τ / lower_bound`.
    pub ratio: Option<f64>,
}

pub fn sojourn_time<M: RankOneModel + ?Sized>(field: &DensityField<'_, M>) -> Result<SojournReport> {
    let (a, b) = field.model().energy_window();
    let bp = field.breakpoints(a, b);
    let integral =
        quad::integrate(|x| Complex64::new(field.density_unchecked(x).norm_sqr(), 0.0), a, b, &bp, 1e-9, 1e-14)?;
    let tau = 2.0 * PI * integral.value.re;
    let kappa = field.resonance().map(|r| r.kappa);
    let lower_bound =
        kappa.filter(|_| field.pairing().is_eigenvector()).map(|k| field.model().phi_norm_sq().powi(2) / (4.0 * k));
    Ok(SojournReport { alpha: field.alpha(), tau, kappa, lower_bound, ratio: lower_bound.map(|lb| tau / lb) })
}

/// `∫_{-T}^{T}|⟨e^{-itH_α}v,w⟩|²dt` by Simpson's rule on `2n+1` points per
/// half-line.
pub fn truncated_sojourn<M: RankOneModel + ?Sized>(field: &DensityField<'_, M>, t_max: f64, n: usize) -> Result<f64> {
    if n == 0 || !(t_max > 0.0) {
        return Err(Error::Config("truncated sojourn needs T > 0 and n >= 1".into()));
    }
    let samples = SpectralSamples::new(field)?;
    let dt = t_max / (2 * n) as f64;
    let half = |sign: f64| -> f64 {
        (0..=2 * n)
            .into_par_iter()
            .map(|j| {
                let w = if j == 0 || j == 2 * n {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * samples.transform(sign * j as f64 * dt, 0.0).norm_sqr()
            })
            .sum::<f64>()
            * dt
            / 3.0
    };
    Ok(half(1.0) + half(-1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid;
    use crate::model1d::{build_hermite_profile, Profile1D};
    use crate::sampled::SampledFunction;

    fn p1() -> Profile1D {
        build_hermite_profile(1.0, 1, 0.0, UniformGrid::default()).unwrap()
    }

    fn gaussian(p: &Profile1D) -> SampledFunction {
        SampledFunction::from_real_fn(*p.grid(), |x| (-(x - 0.5).powi(2)).exp()).unwrap()
    }

    #[test]
    fn graded_nodes_resolve_the_core() {
        let nodes = graded_nodes(-36.0, 36.0, 1.0, 1e-7).unwrap();
        assert_eq!(nodes.len() % 2, 1);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        let core = nodes.iter().filter(|&&x| (x - 1.0).abs() <= 0.5e-7).count();
        assert!(core >= 64, "{core}");
        let widest = nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!(widest <= 0.0100001);
        assert!(matches!(graded_nodes(-36.0, 36.0, 1.0, 0.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn unperturbed_amplitude_matches_direct_quadrature() {
        let p = p1();
        let v = gaussian(&p);
        let pair = SpectralPairing::from_profile(&p, &v, &v).unwrap();
        let field = DensityField::new(&p, &pair, 0.0).unwrap();
        let ts = [0.0, 0.7, 2.0, 5.0, 11.0];
        let amp = survival_at(&field, &ts).unwrap();
        for (t, a) in ts.iter().zip(amp) {
            // ∫e^{-itλ}e^{-2(λ-1/2)²}dλ = √(π/2)e^{-t²/8}e^{-it/2}
            let want = (PI / 2.0).sqrt() * (-t * t / 8.0).exp() * Complex64::new(0.0, -t / 2.0).exp();
            let direct = quad::integrate(
                |x| Complex64::new(0.0, -t * x).exp() * (-2.0 * (x - 0.5).powi(2)).exp(),
                -12.0,
                12.0,
                &[0.5],
                1e-12,
                1e-15,
            )
            .unwrap()
            .value;
            assert!((a - want).norm() < 1e-7, "t={t}");
            assert!((a - direct).norm() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn eigenvector_amplitude_invariants() {
        let p = p1();
        let pair = SpectralPairing::eigenvector(&p).unwrap();
        let field = DensityField::new(&p, &pair, p.alpha0() + 0.05).unwrap();
        let amp = survival_amplitude(&field, 50.0, 201).unwrap();
        assert!((amp.values[0].re - 2.0 / 3.0).abs() < 1e-8);
        assert!(amp.values.iter().all(|a| a.norm() <= 2.0 / 3.0 + 1e-9));
        let back = survival_at(&field, &[-3.0, 3.0]).unwrap();
        assert!((back[0] - back[1].conj()).norm() < 1e-12);
    }

    #[test]
    fn scaled_survival_approaches_exponential() {
        let p = p1();
        let pair = SpectralPairing::eigenvector(&p).unwrap();
        let ts = [0.0, 0.5, 1.0, 2.0, 5.0];
        let alphas = [p.alpha0() + 1e-1, p.alpha0() + 1e-2, p.alpha0() + 1e-3];
        let rows = scaled_survival_limit(&p, &pair, &alphas, &ts).unwrap();
        assert!((rows[2].target - 2.0 / 3.0 * (-1.0f64).exp()).abs() < 1e-12);
        let sup: Vec<f64> = rows.chunks(ts.len()).map(|c| c.iter().map(|r| r.abs_error).fold(0.0, f64::max)).collect();
        for c in rows.chunks(ts.len()) {
            assert!(c[0].abs_error < 1e-6);
        }
        assert!(sup[0] > sup[1] && sup[1] > sup[2] && sup[2] < 1e-2, "{sup:?}");
    }

    #[test]
    fn sojourn_bound_and_unperturbed_value() {
        let p = p1();
        let pair = SpectralPairing::eigenvector(&p).unwrap();
        for d in [1e-1, 1e-2, 1e-3] {
            let field = DensityField::new(&p, &pair, p.alpha0() + d).unwrap();
            let r = sojourn_time(&field).unwrap();
            assert!(r.ratio.unwrap() > 1.0, "{r:?}");
        }
        let v = gaussian(&p);
        let pv = SpectralPairing::from_profile(&p, &v, &v).unwrap();
        let r = sojourn_time(&DensityField::new(&p, &pv, 0.0).unwrap()).unwrap();
        // 2π∫e^{-4(λ-1/2)²}dλ = 2π·√π/2
        assert!((r.tau - PI * PI.sqrt()).abs() < 1e-7);
        assert!(r.lower_bound.is_none());
    }

    #[test]
    fn truncated_sojourn_increases_toward_tau() {
        let p = p1();
        let pair = SpectralPairing::eigenvector(&p).unwrap();
        let field = DensityField::new(&p, &pair, p.alpha0() + 0.3).unwrap();
        let tau = sojourn_time(&field).unwrap().tau;
        let a = truncated_sojourn(&field, 20.0, 200).unwrap();
        let b = truncated_sojourn(&field, 80.0, 800).unwrap();
        assert!(a < b && b <= tau * (1.0 + 1e-6), "{a} {b} {tau}");
    }
}
