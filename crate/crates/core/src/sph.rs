//! Complex spherical harmonics `Y_lm` with the Condon–Shortley phase,
//! orthonormal on the unit sphere.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Position of `(l, m)` in the flattened basis `0..(lmax+1)²`.
pub fn index(l: u32, m: i32) -> usize {
    ((l * l + l) as i64 + m as i64) as usize
}

pub fn basis_len(lmax: u32) -> usize {
    ((lmax + 1) * (lmax + 1)) as usize
}

/// Polar and azimuthal angles of a nonzero vector.
pub fn angles(v: [f64; 3]) -> (f64, f64) {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    ((v[2] / r).clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
}

/// Normalized associated Legendre value `N_lm P_l^m(x)` for `m ≥ 0`, with
/// `N_lm = √((2l+1)/(4π)·(l-m)!/(l+m)!)`.
fn normalized_legendre(l: u32, m: u32, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    // P̄_m^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        pmm *= -((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = x * ((2 * m + 3) as f64).sqrt() * pmm;
    for ll in m + 2..=l {
        let (lf, mf) = (ll as f64, m as f64);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn ylm(l: u32, m: i32, theta: f64, phi: f64) -> Complex64 {
    assert!(m.unsigned_abs() <= l, "|m| > l");
    let p = normalized_legendre(l, m.unsigned_abs(), theta.cos());
    let y = p * Complex64::new(0.0, m.unsigned_abs() as f64 * phi).exp();
    if m >= 0 {
        y
    } else if m % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// `Y_lm(ω)` for a direction vector.
pub fn ylm_at(l: u32, m: i32, omega: [f64; 3]) -> Complex64 {
    let (t, p) = angles(omega);
    ylm(l, m, t, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;

    #[test]
    fn low_orders_closed_form() {
        let (t, p) = (0.7, -1.2);
        assert!((ylm(0, 0, t, p).re - 0.5 / PI.sqrt()).abs() < 1e-15);
        let y10 = (3.0 / (4.0 * PI)).sqrt() * t.cos();
        assert!((ylm(1, 0, t, p) - y10).norm() < 1e-15);
        let y11 = -(3.0 / (8.0 * PI)).sqrt() * t.sin() * Complex64::new(0.0, p).exp();
        assert!((ylm(1, 1, t, p) - y11).norm() < 1e-15);
        let y2m2 = 0.25 * (15.0 / (2.0 * PI)).sqrt() * t.sin().powi(2) * Complex64::new(0.0, -2.0 * p).exp();
        assert!((ylm(2, -2, t, p) - y2m2).norm() < 1e-15);
        let y30 = 0.25 * (7.0 / PI).sqrt() * (5.0 * t.cos().powi(3) - 3.0 * t.cos());
        assert!((ylm(3, 0, t, p) - y30).norm() < 1e-14);
    }

    #[test]
    fn orthonormal_under_product_quadrature() {
        let lmax = 4;
        let (x, w) = gauss_legendre(12);
        let nphi = 16;
        let n = basis_len(lmax);
        let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.acos();
            for j in 0..nphi {
                let phi = 2.0 * PI * j as f64 / nphi as f64;
                let wt = wi * 2.0 * PI / nphi as f64;
                let ys: Vec<Complex64> =
                    (0..=lmax).flat_map(|l| (-(l as i32)..=l as i32).map(move |m| ylm(l, m, theta, phi))).collect();
                for a in 0..n {
                    for b in 0..n {
                        gram[a * n + b] += wt * ys[a] * ys[b].conj();
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * n + b] - want).norm() < 1e-13, "{a},{b}");
            }
        }
    }

    #[test]
    fn indexing_is_dense() {
        let mut seen = vec![false; basis_len(3)];
        for l in 0..=3u32 {
            for m in -(l as i32)..=l as i32 {
                seen[index(l, m)] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        let (t, p) = angles([0.0, 0.0, 2.0]);
        assert_eq!((t, p), (0.0, 0.0));
    }
}
