//! Quadrature: Gauss–Legendre rules, adaptive Gauss–Kronrod (7/15 is too
//! coarse for the Lorentzian spikes we meet, so 10/21) and a Filon-type rule
//! for `∫ e^{-iωλ} g(λ) dλ` on non-uniform nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208606050022,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let err = ((kron - gauss) * h).norm();
    (kron * h, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive Gauss–Kronrod integration of a complex integrand over `[a, b]`,
/// with the interval pre-split at `breakpoints` lying strictly inside.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], rel_tol: f64, abs_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err_total = 0.0;
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (value, err) = gk21(&f, w[0], w[1]);
        evaluations += 21;
        total += value;
        err_total += err;
        heap.push(Segment { a: w[0], b: w[1], value, err });
    }
    const MAX_SEGMENTS: usize = 20_000;
    while err_total > abs_tol.max(rel_tol * total.norm()) {
        let Some(seg) = heap.pop() else { break };
        if heap.len() > MAX_SEGMENTS {
            return Err(Error::Numeric(format!(
                "adaptive quadrature did not converge: error {err_total:e} on [{a}, {b}]"
            )));
        }
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval exhausted at machine precision
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk21(&f, seg.a, mid);
        let (v2, e2) = gk21(&f, mid, seg.b);
        evaluations += 42;
        total += v1 + v2 - seg.value;
        err_total += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
    }
    // resum to shed accumulated cancellation in the running totals
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.err).sum();
    Ok(Integral { value, error, evaluations })
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, breakpoints: &[f64], rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    Ok(integrate(|x| Complex64::new(f(x), 0.0), a, b, breakpoints, rel_tol, abs_tol)?.value.re)
}

/// `∫_{s0}^{s1} s^k e^{-iωs} ds` for `k = 0, 1, 2`.
fn filon_moments(omega: f64, s0: f64, s1: f64) -> [Complex64; 3] {
    let scale = s0.abs().max(s1.abs());
    if omega.abs() * scale < 0.5 {
        // Σ_n z^n/n! (s1^{n+k+1} - s0^{n+k+1})/(n+k+1), terms below 0.5^n/n!
        let z = Complex64::new(0.0, -omega);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let mut p0 = [s0, s0 * s0, s0 * s0 * s0];
        let mut p1 = [s1, s1 * s1, s1 * s1 * s1];
        let mut c = Complex64::new(1.0, 0.0);
        for n in 0..18 {
            for k in 0..3 {
                out[k] += c * ((p1[k] - p0[k]) / (n + k + 1) as f64);
                p0[k] *= s0;
                p1[k] *= s1;
            }
            c *= z / (n + 1) as f64;
        }
        out
    } else {
        let z = Complex64::new(0.0, -omega);
        let prim = |s: f64| {
            let e = (z * s).exp();
            [e / z, e * (s / z - 1.0 / (z * z)), e * (s * s / z - 2.0 * s / (z * z) + 2.0 / (z * z * z))]
        };
        let (p1, p0) = (prim(s1), prim(s0));
        [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]]
    }
}

/// Filon–Simpson approximation of `∫ e^{-iω(λ-c)} g(λ) dλ` from samples of `g`
/// at increasing `nodes` (odd count): `g` is replaced by its piecewise
/// quadratic interpolant on consecutive node triples and the oscillatory
/// factor is integrated exactly.
pub fn filon(nodes: &[f64], values: &[Complex64], omega: f64, center: f64) -> Result<Complex64> {
    if nodes.len() != values.len() || nodes.len() < 3 || nodes.len() % 2 == 0 {
        return Err(Error::Config(format!("filon rule needs an odd number (>= 3) of nodes, got {}", nodes.len())));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in (0..nodes.len() - 2).step_by(2) {
        let (xa, xb, xc) = (nodes[i], nodes[i + 1], nodes[i + 2]);
        let (ga, gb, gc) = (values[i], values[i + 1], values[i + 2]);
        // quadratic in s = λ - xb through (xa-xb, ga), (0, gb), (xc-xb, gc)
        let (da, dc) = (xa - xb, xc - xb);
        let sa = (ga - gb) / da;
        let sc = (gc - gb) / dc;
        let q2 = (sc - sa) / (dc - da);
        let q1 = sa - q2 * da;
        let m = filon_moments(omega, da, dc);
        let phase = Complex64::new(0.0, -omega * (xb - center)).exp();
        acc += phase * (m[0] * gb + m[1] * q1 + m[2] * q2);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_resolves_narrow_lorentzian() {
        let k = 1e-7;
        let r = integrate_real(|x| k / PI / (x * x + k * k), -1.0, 1.0, &[0.0], 1e-12, 0.0).unwrap();
        let want = 2.0 / PI * (1.0 / k).atan();
        assert!((r - want).abs() < 1e-10, "{r} vs {want}");
    }

    #[test]
    fn filon_on_gaussian() {
        // ∫ e^{-iωx} e^{-x²} dx = √π e^{-ω²/4}
        let n = 4001;
        let nodes: Vec<f64> = (0..n).map(|i| -10.0 + 20.0 * i as f64 / (n - 1) as f64).collect();
        let vals: Vec<Complex64> = nodes.iter().map(|x| Complex64::new((-x * x).exp(), 0.0)).collect();
        for &w in &[0.0, 0.7, 3.0, 8.0] {
            let got = filon(&nodes, &vals, w, 0.0).unwrap();
            let want = PI.sqrt() * (-w * w / 4.0).exp();
            assert!((got.re - want).abs() < 1e-9 && got.im.abs() < 1e-9, "omega={w}");
        }
    }

    #[test]
    fn filon_exact_for_quadratics_at_high_frequency() {
        let nodes = [0.0, 0.3, 1.0, 1.2, 2.0];
        let g = |x: f64| Complex64::new(1.0 + x - 0.5 * x * x, 0.0);
        let vals: Vec<Complex64> = nodes.iter().map(|&x| g(x)).collect();
        let w = 1e5;
        let got = filon(&nodes, &vals, w, 0.0).unwrap();
        let m = filon_moments(w, 0.0, 2.0);
        let want = m[0] + m[1] - m[2] * 0.5;
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn filon_rejects_even_count() {
        assert!(filon(&[0.0, 1.0], &[Complex64::new(0.0, 0.0); 2], 1.0, 0.0).is_err());
    }
}
