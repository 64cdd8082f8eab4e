//! Test-only brute-force oracles: radial Simpson quadrature for profile
//! norms, real-space midpoint-rule convolutions, and moment-weighted
//! variants. Deliberately independent of the spectral code paths they check.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::spectral::{cross3, SpectralField3};

/// Nonzero modes of a field as `(k, c(k))` pairs, for fast brute-force sums.
pub fn sparse_modes(f: &SpectralField3) -> Vec<([f64; 3], [Complex64; 3])> {
    f.grid()
        .iter_k()
        .filter(|&(idx, _)| {
            let c = &f.coeff()[idx];
            c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr() > 0.0
        })
        .map(|(idx, k)| (k, f.coeff()[idx]))
        .collect()
}

fn eval_sparse(modes: &[([f64; 3], [Complex64; 3])], x: [f64; 3]) -> [f64; 3] {
    let mut acc = [0.0f64; 3];
    for (k, c) in modes {
        let phase = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
        for a in 0..3 {
            acc[a] += (c[a] * phase).re;
        }
    }
    acc
}

/// Periodicised gaussian `sum_images (2 pi s^2)^{-3/2} e^{-|y - L n|^2 / 2 s^2}`.
pub fn gaussian_periodic(y: [f64; 3], sigma: f64, l: f64) -> f64 {
    let norm = (2.0 * PI * sigma * sigma).powf(-1.5);
    let mut sum = 0.0;
    for nx in -1..=1 {
        for ny in -1..=1 {
            for nz in -1..=1 {
                let d = [
                    y[0] - l * nx as f64,
                    y[1] - l * ny as f64,
                    y[2] - l * nz as f64,
                ];
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                sum += (-0.5 * r2 / (sigma * sigma)).exp();
            }
        }
    }
    norm * sum
}

/// Fixed-step Simpson rule on `[a, b]` with `2 m` panels.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `|| phi ||^2_{Hdot^s}` for the unit-mass gaussian by radial quadrature of
/// `(2 pi)^{-3} 4 pi int r^{2s+2} e^{-sigma^2 r^2} dr`.
pub fn radial_hdot_norm_sq(sigma: f64, s: f64) -> f64 {
    let f = |r: f64| {
        if r == 0.0 {
            if 2.0 * s + 2.0 > 0.0 {
                0.0
            } else {
                // integrable singularity for -3 < 2s <= -2; substitute r = u^2
                0.0
            }
        } else {
            r.powf(2.0 * s + 2.0) * (-sigma * sigma * r * r).exp()
        }
    };
    // substitution r = u^2 regularizes the endpoint for negative s
    let g = |u: f64| 2.0 * u * f(u * u);
    let upper = (12.0 / sigma).sqrt();
    simpson(&g, 0.0, upper, 4000) * 4.0 * PI / (2.0 * PI).powi(3)
}

/// `|| phi ||^2_{H^r}` for the unit-mass gaussian by radial quadrature.
pub fn radial_h_norm_sq(sigma: f64, r: f64) -> f64 {
    let f = |x: f64| x * x * (1.0 + x * x).powf(r) * (-sigma * sigma * x * x).exp();
    simpson(&f, 0.0, 12.0 / sigma, 4000) * 4.0 * PI / (2.0 * PI).powi(3)
}

/// Midpoint-rule torus convolution `(phi * F)(xi)` on an `m^3` grid, with the
/// gaussian evaluated in real space and the field summed from its modes.
pub fn convolve_midpoint(f: &SpectralField3, sigma: f64, xi: [f64; 3], m: usize) -> [f64; 3] {
    let modes = sparse_modes(f);
    let l = f.grid().edge();
    let h = l / m as f64;
    let w = h * h * h;
    let mut acc = [0.0f64; 3];
    for ix in 0..m {
        for iy in 0..m {
            for iz in 0..m {
                let x = [
                    -0.5 * l + (ix as f64 + 0.5) * h,
                    -0.5 * l + (iy as f64 + 0.5) * h,
                    -0.5 * l + (iz as f64 + 0.5) * h,
                ];
                let phi = gaussian_periodic([xi[0] - x[0], xi[1] - x[1], xi[2] - x[2]], sigma, l);
                let val = eval_sparse(&modes, x);
                for a in 0..3 {
                    acc[a] += w * phi * val[a];
                }
            }
        }
    }
    acc
}

fn min_image(d: f64, l: f64) -> f64 {
    let mut x = d % l;
    if x > 0.5 * l {
        x -= l;
    }
    if x < -0.5 * l {
        x += l;
    }
    x
}

/// Midpoint-rule evaluation of the rotating-charge force integral
/// `int [E + (v + Omega x y) x B] phi(y) dx`, `y = x - xi` (minimal image).
pub fn rotating_force_midpoint(
    e_field: &SpectralField3,
    b_field: &SpectralField3,
    sigma: f64,
    xi: [f64; 3],
    v: [f64; 3],
    omega: [f64; 3],
    m: usize,
) -> [f64; 3] {
    let e_modes = sparse_modes(e_field);
    let b_modes = sparse_modes(b_field);
    let l = e_field.grid().edge();
    let h = l / m as f64;
    let w = h * h * h;
    let mut acc = [0.0f64; 3];
    for ix in 0..m {
        for iy in 0..m {
            for iz in 0..m {
                let x = [
                    -0.5 * l + (ix as f64 + 0.5) * h,
                    -0.5 * l + (iy as f64 + 0.5) * h,
                    -0.5 * l + (iz as f64 + 0.5) * h,
                ];
                let y = [
                    min_image(x[0] - xi[0], l),
                    min_image(x[1] - xi[1], l),
                    min_image(x[2] - xi[2], l),
                ];
                let phi = gaussian_periodic(y, sigma, l);
                let ev = eval_sparse(&e_modes, x);
                let bv = eval_sparse(&b_modes, x);
                let vel = [
                    v[0] + omega[1] * y[2] - omega[2] * y[1],
                    v[1] + omega[2] * y[0] - omega[0] * y[2],
                    v[2] + omega[0] * y[1] - omega[1] * y[0],
                ];
                let vxb = cross3(vel, bv);
                for a in 0..3 {
                    acc[a] += w * phi * (ev[a] + vxb[a]);
                }
            }
        }
    }
    acc
}

/// Midpoint-rule torque integral `int y x [E + (v + Omega x y) x B] phi dx`.
pub fn rotating_torque_midpoint(
    e_field: &SpectralField3,
    b_field: &SpectralField3,
    sigma: f64,
    xi: [f64; 3],
    v: [f64; 3],
    omega: [f64; 3],
    m: usize,
) -> [f64; 3] {
    let e_modes = sparse_modes(e_field);
    let b_modes = sparse_modes(b_field);
    let l = e_field.grid().edge();
    let h = l / m as f64;
    let w = h * h * h;
    let mut acc = [0.0f64; 3];
    for ix in 0..m {
        for iy in 0..m {
            for iz in 0..m {
                let x = [
                    -0.5 * l + (ix as f64 + 0.5) * h,
                    -0.5 * l + (iy as f64 + 0.5) * h,
                    -0.5 * l + (iz as f64 + 0.5) * h,
                ];
                let y = [
                    min_image(x[0] - xi[0], l),
                    min_image(x[1] - xi[1], l),
                    min_image(x[2] - xi[2], l),
                ];
                let phi = gaussian_periodic(y, sigma, l);
                let ev = eval_sparse(&e_modes, x);
                let bv = eval_sparse(&b_modes, x);
                let vel = [
                    v[0] + omega[1] * y[2] - omega[2] * y[1],
                    v[1] + omega[2] * y[0] - omega[0] * y[2],
                    v[2] + omega[0] * y[1] - omega[1] * y[0],
                ];
                let vxb = cross3(vel, bv);
                let integrand = [ev[0] + vxb[0], ev[1] + vxb[1], ev[2] + vxb[2]];
                let t = cross3(y, integrand);
                for a in 0..3 {
                    acc[a] += w * phi * t[a];
                }
            }
        }
    }
    acc
}
