//! The acceptance suite: eleven numbered criteria, each reduced to a set of
//! checks and reported as `{name, value, target, tol, pass}`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Spec1D, Spec3D};
use crate::density::{breit_wigner_scan, concentration_mass, DensityField, SpectralPairing};
use crate::dynamics::{scaled_survival_limit, sojourn_time, survival_at};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::model::RankOneModel;
use crate::model1d::{verify_eigenpair, Profile1D};
use crate::model3d::{cross_section_scan, r_hs_limit, scattering_operator3d, Profile3D};
use crate::oracle::build_oracle;
use crate::pv::{plemelj_boundary_value, principal_value, Side};
use crate::quad;
use crate::resonance::{solve_resonance, strictly_decreasing, symmetric_detunings, worst_per_detuning};
use crate::sampled::SampledFunction;
use crate::scattering1d::{r_limit_scan, spectral_shift_scan, Scattering};

/// Criterion ids and names, in report order.
pub const CRITERIA: [(u8, &str); 11] = [
    (1, "pv-isometry"),
    (2, "pv-tail"),
    (3, "plemelj"),
    (4, "model"),
    (5, "breit-wigner"),
    (6, "survival"),
    (7, "sojourn"),
    (8, "scattering"),
    (9, "oracle"),
    (10, "concentration"),
    (11, "model3d"),
];

const DETUNINGS: [f64; 3] = [1e-1, 1e-2, 1e-3];
const HS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tol: f64,
    pub pass: bool,
    /// Wall time; left out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {:<13} value={:.6e} target={:.6e} tol={:.1e} ({:.1}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.value,
            self.target,
            self.tol,
            self.seconds
        )
    }
}

#[derive(Debug, Clone)]
pub struct AcceptanceOptions {
    /// Replaces every numeric tolerance when set.
    pub tol: Option<f64>,
    /// Criterion names or name prefixes; empty selects all.
    pub only: Vec<String>,
    pub seed: u64,
    pub oracle_points: usize,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self { tol: None, only: Vec::new(), seed: 7, oracle_points: 4096 }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// `|value - target| < tol`
    Close,
    /// `value > target`
    Above,
    /// `value <= target`
    AtMost,
}

#[derive(Debug, Clone)]
struct Check {
    label: String,
    value: f64,
    target: f64,
    tol: f64,
    kind: Kind,
}

impl Check {
    fn pass(&self) -> bool {
        match self.kind {
            Kind::Close => (self.value - self.target).abs() < self.tol,
            Kind::Above => self.value > self.target,
            Kind::AtMost => self.value <= self.target,
        }
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn close(&mut self, label: impl Into<String>, value: f64, target: f64, tol: f64) {
        self.0.push(Check { label: label.into(), value, target, tol, kind: Kind::Close });
    }

    fn above(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.0.push(Check { label: label.into(), value, target: bound, tol: 0.0, kind: Kind::Above });
    }

    fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.0.push(Check { label: label.into(), value, target: bound, tol: 0.0, kind: Kind::AtMost });
    }

    /// Worst errors per detuning must strictly decrease.
    fn decreasing(&mut self, label: impl Into<String>, errors: &[f64]) {
        let ok = strictly_decreasing(errors, 1e-13);
        let label =
            format!("{} decreasing {:?}", label.into(), errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>());
        self.0.push(Check { label, value: if ok { 1.0 } else { 0.0 }, target: 1.0, tol: 0.5, kind: Kind::Close });
    }

    fn finish(self, id: u8, name: &str, seconds: f64) -> CriterionResult {
        let pass = self.0.iter().all(Check::pass);
        let head = self.0.iter().find(|c| !c.pass()).or_else(|| self.0.first()).cloned();
        let detail = self
            .0
            .iter()
            .map(|c| {
                format!(
                    "{}: {:.6e} vs {:.6e}{} {}",
                    c.label,
                    c.value,
                    c.target,
                    if matches!(c.kind, Kind::Close) { format!(" (tol {:.1e})", c.tol) } else { String::new() },
                    if c.pass() { "ok" } else { "FAIL" }
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        let head = head.unwrap_or(Check { label: String::new(), value: 0.0, target: 0.0, tol: 0.0, kind: Kind::Close });
        CriterionResult {
            id,
            name: name.into(),
            value: head.value,
            target: head.target,
            tol: head.tol,
            pass,
            seconds,
            detail,
        }
    }
}

/// An exact name selects only itself; anything else is a prefix.
fn selects(pattern: &str, name: &str) -> bool {
    if CRITERIA.iter().any(|(_, n)| *n == pattern) {
        pattern == name
    } else {
        name.starts_with(pattern)
    }
}

/// Shared inputs: the 1D profile under test, an order-two companion, and the
/// 3D profile.
pub struct Acceptance {
    profile: Profile1D,
    profile_n2: Profile1D,
    profile3d: Profile3D,
    opts: AcceptanceOptions,
}

impl Acceptance {
    pub fn new(spec1d: &Spec1D, spec3d: &Spec3D, opts: AcceptanceOptions) -> Result<Self> {
        for name in &opts.only {
            if !CRITERIA.iter().any(|(_, n)| selects(name, n)) {
                return Err(Error::Config(format!("no acceptance criterion matches {name:?}")));
            }
        }
        let profile = spec1d.build()?;
        let mut n2 = spec1d.clone();
        n2.n = 2;
        Ok(Self { profile, profile_n2: n2.build()?, profile3d: spec3d.build()?, opts })
    }

    pub fn with_defaults(opts: AcceptanceOptions) -> Result<Self> {
        Self::new(&Spec1D::p1(), &Spec3D::default_two_channel(), opts)
    }

    pub fn selected(&self) -> Vec<(u8, &'static str)> {
        CRITERIA
            .iter()
            .copied()
            .filter(|(_, n)| self.opts.only.is_empty() || self.opts.only.iter().any(|o| selects(o, n)))
            .collect()
    }

    fn tol(&self, default: f64) -> f64 {
        self.opts.tol.unwrap_or(default)
    }

    pub fn run_all(&self) -> Result<Vec<CriterionResult>> {
        self.selected().into_iter().map(|(id, _)| self.run(id)).collect()
    }

    pub fn run(&self, id: u8) -> Result<CriterionResult> {
        let name = CRITERIA
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, n)| *n)
            .ok_or_else(|| Error::Config(format!("no acceptance criterion {id}")))?;
        let start = Instant::now();
        let checks = match id {
            1 => self.pv_isometry()?,
            2 => self.pv_tail()?,
            3 => self.plemelj()?,
            4 => self.model()?,
            5 => self.breit_wigner()?,
            6 => self.survival()?,
            7 => self.sojourn()?,
            8 => self.scattering()?,
            9 => self.oracle()?,
            10 => self.concentration()?,
            _ => self.model3d()?,
        };
        let r = checks.finish(id, name, start.elapsed().as_secs_f64());
        log::info!("{}", r.line());
        Ok(r)
    }

    fn alphas(&self, model: &dyn RankOneModel) -> Vec<f64> {
        symmetric_detunings(model.alpha0(), &DETUNINGS)
    }

    fn pv_isometry(&self) -> Result<Checks> {
        let g = *self.profile.grid();
        let u = self.profile.u().clone();
        let profiles: Vec<(&str, SampledFunction)> = vec![
            ("gaussian", SampledFunction::from_real_fn(g, |x| (-x * x / 2.0).exp())?),
            ("odd", SampledFunction::from_real_fn(g, |x| x * (-x * x).exp())?),
            ("complex", SampledFunction::from_fn(g, |x| Complex64::new(1.0, 0.5) * (-(x - 1.0).powi(2)).exp())?),
            ("coupling", u.mul_conj(&u)),
            ("oscillating", SampledFunction::from_real_fn(g, |x| (x * x - 1.0) * x.cos() * (-x * x / 2.0).exp())?),
        ];
        let mut c = Checks::default();
        for (label, f) in profiles {
            let ratio = principal_value(&f)?.l2_norm() / f.norm();
            c.close(format!("{label} norm ratio"), ratio, 1.0, self.tol(1e-8));
        }
        Ok(c)
    }

    fn pv_tail(&self) -> Result<Checks> {
        let g = UniformGrid::new(40.0, self.profile.grid().len())?;
        let f = SampledFunction::from_real_fn(g, |x| (-x * x).exp())?;
        let pv = principal_value(&f)?;
        let lam = 15.0;
        let mut c = Checks::default();
        c.close("lambda*gamma + integral at 15", (lam * pv.eval(lam) + f.integral()).norm(), 0.0, self.tol(1e-2));
        Ok(c)
    }

    fn plemelj(&self) -> Result<Checks> {
        let g = *self.profile.grid();
        let eps = 1e-4;
        let fns: [(&str, fn(f64) -> f64); 2] =
            [("gaussian", |x| (-x * x).exp()), ("odd", |x| x * (-x * x / 2.0).exp())];
        let mut worst: f64 = 0.0;
        for (_, f) in fns {
            let sampled = SampledFunction::from_real_fn(g, f)?;
            for lam in [-0.7, 0.0, 0.3, 1.2] {
                let mut bp = vec![lam];
                for k in 0..6 {
                    let d = eps * 10f64.powi(k);
                    bp.extend([lam - d, lam + d]);
                }
                for side in [Side::Upper, Side::Lower] {
                    let s = side.sign();
                    let quad =
                        quad::integrate(|x| f(x) / Complex64::new(x - lam, -s * eps), -15.0, 15.0, &bp, 1e-12, 1e-14)?
                            .value;
                    let bv = plemelj_boundary_value(&sampled, lam, side)?;
                    worst = worst.max((quad - bv).norm());
                }
            }
        }
        let mut c = Checks::default();
        c.close("boundary value vs eps=1e-4 integral", worst, 0.0, self.tol(5e-3));
        Ok(c)
    }

    fn model(&self) -> Result<Checks> {
        let p = &self.profile;
        let shape = p.shape();
        let lo = shape.center.min(shape.lambda0) - 30.0;
        let hi = shape.center.max(shape.lambda0) + 30.0;
        let bp = [shape.lambda0, shape.center];
        // |u|²/(x-λ₀) is smooth because u(λ₀) = 0
        let gamma = quad::integrate_real(|x| p.u_at(x).powi(2) / (x - shape.lambda0), lo, hi, &bp, 1e-14, 0.0)?;
        let phi_sq = quad::integrate_real(
            |x| {
                let d = x - shape.lambda0;
                if d == 0.0 {
                    p.u_derivative_at(x).powi(2)
                } else {
                    (p.u_at(x) / d).powi(2)
                }
            },
            lo,
            hi,
            &bp,
            1e-14,
            0.0,
        )?;
        let report = verify_eigenpair(p);
        let mut c = Checks::default();
        c.close("eigen-residual", report.relative_residual, 0.0, self.tol(1e-7));
        c.close("alpha0 vs quadrature", p.alpha0(), -1.0 / gamma, self.tol(1e-7));
        c.close("phi norm^2 vs quadrature", p.phi_norm_sq(), phi_sq, self.tol(1e-7));
        Ok(c)
    }

    fn breit_wigner(&self) -> Result<Checks> {
        let p = &self.profile;
        let pair = SpectralPairing::eigenvector(p)?;
        let rows = breit_wigner_scan(p, &pair, &HS, &self.alphas(p))?;
        let mut c = Checks::default();
        for (j, h) in HS.iter().enumerate() {
            let e: Vec<f64> = rows.iter().skip(j).step_by(HS.len()).map(|r| r.abs_error).collect();
            let w = worst_per_detuning(&e);
            c.close(format!("h={h} error at 1e-3"), w[2], 0.0, self.tol(1e-2));
            c.decreasing(format!("h={h}"), &w);
        }
        Ok(c)
    }

    fn survival(&self) -> Result<Checks> {
        let p = &self.profile;
        let pair = SpectralPairing::eigenvector(p)?;
        let ts = [0.0, 0.5, 1.0, 2.0, 5.0];
        let rows = scaled_survival_limit(p, &pair, &self.alphas(p), &ts)?;
        let sup: Vec<f64> = rows.chunks(ts.len()).map(|c| c.iter().map(|r| r.abs_error).fold(0.0, f64::max)).collect();
        let w = worst_per_detuning(&sup);
        let mut c = Checks::default();
        c.close("sup_t error at 1e-3", w[2], 0.0, self.tol(1e-2));
        c.decreasing("sup_t error", &w);
        Ok(c)
    }

    fn sojourn(&self) -> Result<Checks> {
        let p = &self.profile;
        let pair = SpectralPairing::eigenvector(p)?;
        let mut c = Checks::default();
        for alpha in self.alphas(p) {
            let r = sojourn_time(&DensityField::new(p, &pair, alpha)?)?;
            let ratio = r.ratio.ok_or_else(|| Error::Numeric("no resonance for the sojourn bound".into()))?;
            c.above(format!("tau*4kappa/|phi|^4 at alpha-alpha0={:+.0e}", alpha - p.alpha0()), ratio, 1.0);
        }
        Ok(c)
    }

    fn scattering(&self) -> Result<Checks> {
        let p = &self.profile;
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let (lo, hi) = p.energy_window();
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let alpha = p.alpha0() + rng.gen_range(-1.0..1.0);
            let x = rng.gen_range(lo..hi);
            let s = Scattering::new(p, alpha).s(x)?;
            worst = worst.max((s.norm() - 1.0).abs());
        }
        let mut c = Checks::default();
        c.close("max ||S|-1| over 1000 points", worst, 0.0, self.tol(1e-10));
        let alphas = self.alphas(p);
        for h in HS {
            let rr = r_limit_scan(p, h, &alphas)?;
            let w = worst_per_detuning(&rr.iter().map(|r| r.abs2_error).collect::<Vec<_>>());
            c.close(format!("|R|^2 h={h} error at 1e-3"), w[2], 0.0, self.tol(1e-2));
            c.decreasing(format!("|R|^2 h={h}"), &w);
            let ss = spectral_shift_scan(p, h, &alphas)?;
            let w = worst_per_detuning(&ss.iter().map(|r| r.abs_error).collect::<Vec<_>>());
            c.close(format!("kappa*xi' h={h} error at 1e-3"), w[2], 0.0, self.tol(1e-2));
            c.decreasing(format!("kappa*xi' h={h}"), &w);
        }
        Ok(c)
    }

    fn oracle(&self) -> Result<Checks> {
        let p = &self.profile;
        let alpha = p.alpha0() + 0.05;
        let oracle = build_oracle(p, alpha, self.opts.oracle_points)?;
        let phi = p.phi().clone();
        let measure = oracle.measure(|x| phi.eval(x));
        let pair = SpectralPairing::eigenvector(p)?;
        let field = DensityField::new(p, &pair, alpha)?;
        let ts: Vec<f64> = (0..=200).map(|j| 0.25 * j as f64).collect();
        let a = survival_at(&field, &ts)?;
        let b = measure.survival_many(&ts);
        let surv = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);

        let eta = 0.05;
        let res = solve_resonance(p, alpha)?;
        let (lo, hi) = p.energy_window();
        let mut dens: f64 = 0.0;
        for lam in [-1.0, -0.5, 0.0, 0.5, res.lambda, 1.5, 2.0] {
            let conv = quad::integrate_real(
                |mu| field.density(mu).map(|r| r.re).unwrap_or(0.0) * eta / PI / ((lam - mu).powi(2) + eta * eta),
                lo,
                hi,
                &[lam - eta, lam, lam + eta, res.lambda],
                1e-10,
                0.0,
            )?;
            let got = measure.smoothed_density(lam, eta)?;
            dens = dens.max((got - conv).abs() / conv.abs().max(1e-2));
        }
        let mut c = Checks::default();
        c.close("survival max-norm on [0,50]", surv, 0.0, self.tol(2e-3));
        c.close("Poisson-smoothed density relative", dens, 0.0, self.tol(1e-3));
        Ok(c)
    }

    fn concentration(&self) -> Result<Checks> {
        let p = &self.profile;
        let pair = SpectralPairing::eigenvector(p)?;
        let norm = p.phi_norm_sq();
        let rel = |d: f64| -> Result<f64> {
            let mut w: f64 = 0.0;
            for alpha in [p.alpha0() + d, p.alpha0() - d] {
                w = w.max((concentration_mass(p, &pair, alpha, 1.0)?.mass / norm - 1.0).abs());
            }
            Ok(w)
        };
        let (e3, e4) = (rel(1e-3)?, rel(1e-4)?);
        let mut c = Checks::default();
        c.close("relative mass defect at 1e-3", e3, 0.0, self.tol(5e-2));
        c.decreasing("mass defect 1e-3 -> 1e-4", &[e3, e4]);

        let q = &self.profile_n2;
        let order = 2 * q.vanishing_order() as i32;
        let ratios: Vec<f64> = self
            .alphas(q)
            .into_iter()
            .map(|a| Ok(solve_resonance(q, a)?.kappa / (a - q.alpha0()).abs().powi(order)))
            .collect::<Result<_>>()?;
        let (mn, mx) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        c.at_most(format!("n=2 kappa/|alpha-alpha0|^{order} spread max/min"), mx / mn, 10.0);
        Ok(c)
    }

    fn model3d(&self) -> Result<Checks> {
        let p = &self.profile3d;
        let a0 = p.alpha0();
        let mut unit: f64 = 0.0;
        let mut det: f64 = 0.0;
        for alpha in [0.3, a0 - 0.1, a0 + 1e-3, a0 + 0.1, 2.5] {
            for lam in [0.3, 1.0, 1.9, 2.0, 2.05, 3.0, 6.0, 12.0] {
                let s = scattering_operator3d(p, alpha, lam)?;
                unit = unit.max(s.unitarity_defect());
                det = det.max((s.determinant() - s.g.conj() / s.g).norm());
            }
        }
        let mut c = Checks::default();
        c.close("S unitarity defect", unit, 0.0, self.tol(1e-9));
        c.close("det S vs conj(G)/G", det, 0.0, self.tol(1e-8));

        let alphas = self.alphas(p);
        let pair = p.eigenvector_pairing()?;
        let bw = breit_wigner_scan(p, &pair, &HS, &alphas)?;
        for (j, h) in HS.iter().enumerate() {
            let mut limit = |label: &str, errors: Vec<f64>| {
                let w = worst_per_detuning(&errors);
                c.close(format!("{label} h={h} error at 1e-3"), w[2], 0.0, self.tol(2e-2));
                c.decreasing(format!("{label} h={h}"), &w);
            };
            limit("kappa*rho", bw.iter().skip(j).step_by(HS.len()).map(|r| r.abs_error).collect());
            limit("cross-section", cross_section_scan(p, *h, &alphas)?.iter().map(|r| r.abs_error).collect());
            limit(
                "kappa*zeta",
                spectral_shift_scan(p, *h, &alphas)?.iter().map(|r| (r.kappa_delay - r.delay_target).abs()).collect(),
            );
            limit("HS limit of R", r_hs_limit(p, *h, &alphas)?.iter().map(|r| r.hs_error).collect());
        }
        Ok(c)
    }
}
