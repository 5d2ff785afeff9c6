//! Cauchy principal values `γ(f,λ) = p.v. ∫ f(x)/(x-λ) dx` and the Plemelj
//! boundary values `γ(f,λ) ± iπ f(λ)` for smooth, rapidly decaying samples.
//!
//! The sampled function is identified with its band-limited (sinc)
//! interpolant. Applying the multiplier `iπ sgn(ξ)` to that interpolant's
//! transform gives the discrete Hilbert kernel on the nodes,
//!
//! ```text
//! γ(f, x_k) = Σ_{j-k odd} 2 f_j / (j - k),
//! ```
//!
//! which is evaluated as a zero-padded (linear, not circular) FFT convolution.
//! The principal value decays only like `1/λ`, so a periodic multiplier on the
//! sampling grid would alias that tail back into the window.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::plan;
use crate::grid::UniformGrid;
use crate::interp;
use crate::sampled::SampledFunction;

/// Side of the real axis from which a boundary value is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    /// `λ + i0`
    Upper,
    /// `λ - i0`
    Lower,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

/// Number of moments `∫ x^k f` kept for the large-`λ` expansion of `γ`.
const TAIL_MOMENTS: usize = 10;

/// `γ(f,·)` sampled on the grid of `f`.
#[derive(Debug, Clone)]
pub struct PrincipalValueResult {
    grid: UniformGrid,
    gamma_values: Vec<Complex64>,
    moments: [Complex64; TAIL_MOMENTS],
}

static KERNELS: OnceLock<Mutex<HashMap<usize, Arc<Vec<Complex64>>>>> = OnceLock::new();

/// Spectrum of the discrete Hilbert kernel `K(m) = -2/m` (odd `m`), laid out
/// circularly on `2n` points.
fn kernel_spectrum(n: usize) -> Arc<Vec<Complex64>> {
    let cache = KERNELS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(k) = cache.lock().expect("kernel cache poisoned").get(&n) {
        return k.clone();
    }
    let m2 = 2 * n;
    let mut k: Vec<Complex64> = (0..m2)
        .map(|i| {
            let m = if i < n { i as isize } else { i as isize - m2 as isize };
            if m % 2 != 0 {
                Complex64::new(-2.0 / m as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    plan(m2, false).process(&mut k);
    let k = Arc::new(k);
    cache.lock().expect("kernel cache poisoned").insert(n, k.clone());
    k
}

fn moments(f: &SampledFunction) -> [Complex64; TAIL_MOMENTS] {
    let g = f.grid();
    let mut out = [Complex64::new(0.0, 0.0); TAIL_MOMENTS];
    for (x, v) in g.nodes().zip(f.values()) {
        let mut p = 1.0;
        for m in out.iter_mut() {
            *m += v * p;
            p *= x;
        }
    }
    for m in out.iter_mut() {
        *m *= g.spacing();
    }
    out
}

/// `γ(f,·)` on the nodes of `f`'s grid.
pub fn principal_value(f: &SampledFunction) -> Result<PrincipalValueResult> {
    if !f.is_well_decayed() {
        log::warn!(
            "principal value of a function with decay certificate {:e}; edge truncation is uncontrolled",
            f.decay_certificate()
        );
    }
    let grid = *f.grid();
    let n = grid.len();
    let kernel = kernel_spectrum(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
    buf[..n].copy_from_slice(f.values());
    plan(2 * n, false).process(&mut buf);
    for (b, k) in buf.iter_mut().zip(kernel.iter()) {
        *b *= k;
    }
    plan(2 * n, true).process(&mut buf);
    let scale = 1.0 / (2 * n) as f64;
    let gamma_values = buf[..n].iter().map(|v| v * scale).collect();
    Ok(PrincipalValueResult { grid, gamma_values, moments: moments(f) })
}

/// `γ(f,λ)` at an arbitrary `λ`, summed directly against the principal value
/// of each sinc basis function. `O(N)` per point.
pub fn principal_value_at(f: &SampledFunction, lambda: f64) -> Complex64 {
    let g = f.grid();
    let h = g.spacing();
    let a = PI / h;
    f.values()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let t = lambda - g.node(j);
            let w = if (a * t).abs() < 1e-4 {
                let at = a * t;
                -a * at * 0.5 * (1.0 - at * at / 12.0) * h
            } else {
                h * ((a * t).cos() - 1.0) / t
            };
            v * w
        })
        .sum()
}

impl PrincipalValueResult {
    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.gamma_values
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.gamma_values.iter().map(|v| v.re).collect()
    }

    /// Cubic interpolation of `γ` between nodes.
    pub fn eval(&self, lambda: f64) -> Complex64 {
        interp::cubic(&self.grid, &self.gamma_values, lambda)
    }

    pub fn derivative(&self, lambda: f64) -> Complex64 {
        interp::cubic_derivative(&self.grid, &self.gamma_values, lambda)
    }

    /// Large-`|λ|` expansion `γ(f,λ) ≈ -Σ_k m_k / λ^{k+1}`, `m_k = ∫ x^k f`.
    pub fn asymptotic(&self, lambda: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = 1.0 / lambda;
        for m in &self.moments {
            acc -= m * p;
            p /= lambda;
        }
        acc
    }

    /// `∫ f`, the coefficient of the `-1/λ` tail.
    pub fn total_integral(&self) -> Complex64 {
        self.moments[0]
    }

    /// `‖γ(f,·)‖²` over the whole line: trapezoidal sum on the grid plus the
    /// analytic integral of the moment expansion over `|λ| > L`.
    pub fn l2_norm_sq(&self) -> f64 {
        let h = self.grid.spacing();
        let l = self.grid.half_width();
        let n = self.gamma_values.len();
        let edge = self.asymptotic(l).norm_sqr();
        let inner: f64 = self.gamma_values[1..].iter().map(|v| v.norm_sqr()).sum::<f64>()
            + 0.5 * (self.gamma_values[0].norm_sqr() + edge);
        debug_assert_eq!(n, self.grid.len());

        // ∫_L^∞ |Σ a_k λ^{-(k+1)}|² dλ and its mirror image on (-∞,-L]
        let tail = |coef: &dyn Fn(usize) -> Complex64| {
            let mut s = 0.0;
            for k in 0..TAIL_MOMENTS {
                for m in 0..TAIL_MOMENTS {
                    let p = (k + m + 1) as f64;
                    s += (coef(k) * coef(m).conj()).re / (p * l.powf(p));
                }
            }
            s
        };
        let right = tail(&|k| -self.moments[k]);
        let left = tail(&|k| {
            let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
            -self.moments[k] * sign
        });
        inner * h + right + left
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }
}

/// `∂_λ γ(|f|²,·)` at a zero `x0` of `f`, evaluated as `∫ |f(x)/(x-x0)|² dx`.
pub fn pv_derivative_at_zero(f: &SampledFunction, x0: f64, tol_zero: f64) -> Result<f64> {
    let at_zero = f.eval(x0).norm();
    if !(at_zero < tol_zero) {
        return Err(Error::Precondition(format!("|f(x0)| = {at_zero:e} is not below tol_zero = {tol_zero:e}")));
    }
    let g = f.grid();
    let h = g.spacing();
    let fd = 1e-3;
    let slope =
        (f.eval(x0 - 2.0 * fd) - f.eval(x0 - fd) * 8.0 + f.eval(x0 + fd) * 8.0 - f.eval(x0 + 2.0 * fd)) / (12.0 * fd);
    let sum: f64 = g
        .nodes()
        .zip(f.values())
        .map(|(x, v)| {
            let d = x - x0;
            if d.abs() < 1e-6 * h {
                slope.norm_sqr()
            } else {
                (v / d).norm_sqr()
            }
        })
        .sum();
    Ok(sum * h)
}

/// `lim_{ε→0+} ∫ f(x)/(x-(λ±iε)) dx = γ(f,λ) ± iπ f(λ)`.
pub fn plemelj_boundary_value(f: &SampledFunction, lambda: f64, side: Side) -> Result<Complex64> {
    f.grid().check_in_safe_window("lambda", lambda)?;
    let gamma = principal_value_at(f, lambda);
    Ok(gamma + Complex64::new(0.0, side.sign() * PI) * f.eval(lambda))
}
