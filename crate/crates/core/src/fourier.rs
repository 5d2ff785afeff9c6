//! Continuous Fourier transform `f̂(ξ) = (2π)^{-1/2} ∫ f(x) e^{-iξx} dx` of
//! grid-sampled functions, via the FFT.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::sampled::SampledFunction;

static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();

/// Cached FFT plan (`inverse` selects the `e^{+2πi..}` direction, unnormalized).
pub(crate) fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut plans = plans.lock().expect("fft plan cache poisoned");
    plans
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner =
                PLANNER.get_or_init(|| Mutex::new(FftPlanner::new())).lock().expect("fft planner poisoned");
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

fn warn_if_not_decayed(f: &SampledFunction) {
    if !f.is_well_decayed() {
        log::warn!(
            "decay certificate {:e} exceeds 1e-10 * max|f| = {:e}; truncation error is not controlled",
            f.decay_certificate(),
            1e-10 * f.max_abs()
        );
    }
}

/// Samples `f̂` on the dual grid `ξ_j = πj/L`, `j = -N/2..N/2`.
pub fn fourier_transform(f: &SampledFunction) -> Result<SampledFunction> {
    warn_if_not_decayed(f);
    let grid = *f.grid();
    let n = grid.len();
    let mut buf = f.values().to_vec();
    plan(n, false).process(&mut buf);
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    let values = (0..n)
        .map(|k| {
            let j = k as isize - (n / 2) as isize;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            buf[j.rem_euclid(n as isize) as usize] * (scale * sign)
        })
        .collect();
    SampledFunction::from_samples(grid.dual(), values)
}

/// Inverse of [`fourier_transform`]: `f(x) = (2π)^{-1/2} ∫ f̂(ξ) e^{iξx} dξ`,
/// returned on the grid of half-width `half_width`.
pub fn inverse_fourier_transform(fhat: &SampledFunction, half_width: f64) -> Result<SampledFunction> {
    let dual = *fhat.grid();
    let n = dual.len();
    let grid = crate::grid::UniformGrid::new(half_width, n)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, v) in fhat.values().iter().enumerate() {
        let j = k as isize - (n / 2) as isize;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        buf[j.rem_euclid(n as isize) as usize] = v * sign;
    }
    plan(n, true).process(&mut buf);
    let scale = dual.spacing() / (2.0 * PI).sqrt();
    SampledFunction::from_samples(grid, buf.into_iter().map(|v| v * scale).collect())
}
