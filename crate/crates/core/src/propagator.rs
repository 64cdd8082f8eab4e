//! Exact free-field group `U(t)` applied per Fourier mode, and the particle
//! drift `W(t)`.
//!
//! Per mode the source-free Maxwell pair `dE/dt = curl B`, `dB/dt = -curl E`
//! reads `dE/dt = C(k) B`, `dB/dt = -C(k) E` with `C(k) f = i k x f`, and the
//! flow is a rotation mixing the transverse parts at frequency `|k|`:
//!
//! ```text
//! E(t) = P_par E0 + cos(|k| t) P_perp E0 + sin(|k| t)/|k| C(k) B0
//! B(t) = P_par B0 + cos(|k| t) P_perp B0 - sin(|k| t)/|k| C(k) E0
//! ```
//!
//! Longitudinal (`P_par`) components and the `k = 0` mode are untouched for
//! all `t`.

use std::sync::Arc;

use nalgebra::{Matrix3, Matrix6};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{dot3, Grid, SpectralField3};

/// Electromagnetic half of the system state: the pair (E, B).
#[derive(Debug, Clone)]
pub struct EMState {
    pub e: SpectralField3,
    pub b: SpectralField3,
}

impl EMState {
    pub fn new(e: SpectralField3, b: SpectralField3) -> Result<Self> {
        if !Arc::ptr_eq(e.grid(), b.grid()) && e.grid() != b.grid() {
            return Err(Error::FieldMismatch("E and B live on different grids".into()));
        }
        if !e.is_real() || !b.is_real() {
            return Err(Error::NotReal);
        }
        Ok(EMState { e, b })
    }

    pub fn zero(grid: &Arc<Grid>) -> Self {
        EMState { e: SpectralField3::zero(grid), b: SpectralField3::zero(grid) }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.e.grid()
    }

    pub fn hs_norm_sq(&self, s: f64) -> Result<f64> {
        Ok(self.e.hs_norm(s)?.powi(2) + self.b.hs_norm(s)?.powi(2))
    }

    pub fn hs_seminorm_sq(&self, s: f64) -> f64 {
        self.e.hs_seminorm(s).powi(2) + self.b.hs_seminorm(s).powi(2)
    }
}

/// Relative threshold below which `|k|` is treated as zero (sinc limit).
pub fn k_epsilon(grid: &Grid) -> f64 {
    1e-14 * (2.0 * std::f64::consts::PI / grid.edge())
}

/// `C(k)` with `C(k) f = i k x f`.
pub fn curl_symbol(k: [f64; 3]) -> Matrix3<Complex64> {
    let i = Complex64::i();
    Matrix3::new(
        Complex64::ZERO, -i * k[2], i * k[1],
        i * k[2], Complex64::ZERO, -i * k[0],
        -i * k[1], i * k[0], Complex64::ZERO,
    )
}

/// One mode of the propagator as an explicit 6x6 block matrix acting on
/// `(E, B)`. Used by tests and diagnostics; the hot path is
/// [`propagate_mode`].
pub fn propagator_symbol(k: [f64; 3], t: f64, eps_k: f64) -> Matrix6<Complex64> {
    let kn = dot3(k, k).sqrt();
    let mut m = Matrix6::zeros();
    if kn < eps_k {
        for i in 0..6 {
            m[(i, i)] = Complex64::ONE;
        }
        return m;
    }
    let c = (kn * t).cos();
    let sinc = (kn * t).sin() / kn;
    let khat = [k[0] / kn, k[1] / kn, k[2] / kn];
    let curl = curl_symbol(k);
    for a in 0..3 {
        for b in 0..3 {
            let p_par = Complex64::new(khat[a] * khat[b], 0.0);
            let p_perp = Complex64::new(if a == b { 1.0 } else { 0.0 } - khat[a] * khat[b], 0.0);
            let diag = p_par + c * p_perp;
            m[(a, b)] = diag;
            m[(a + 3, b + 3)] = diag;
            m[(a, b + 3)] = sinc * curl[(a, b)];
            m[(a + 3, b)] = -sinc * curl[(a, b)];
        }
    }
    m
}

/// Apply the free flow at time `t` to one mode pair in place.
#[inline]
pub fn propagate_mode(
    k: [f64; 3],
    t: f64,
    eps_k: f64,
    e: &mut [Complex64; 3],
    b: &mut [Complex64; 3],
) {
    let k2 = dot3(k, k);
    let kn = k2.sqrt();
    if kn < eps_k {
        return;
    }
    let cos = (kn * t).cos();
    let sinc = (kn * t).sin() / kn;
    let kde = (k[0] * e[0] + k[1] * e[1] + k[2] * e[2]) / k2;
    let kdb = (k[0] * b[0] + k[1] * b[1] + k[2] * b[2]) / k2;
    let i = Complex64::i();
    let kxe = [
        k[1] * e[2] - k[2] * e[1],
        k[2] * e[0] - k[0] * e[2],
        k[0] * e[1] - k[1] * e[0],
    ];
    let kxb = [
        k[1] * b[2] - k[2] * b[1],
        k[2] * b[0] - k[0] * b[2],
        k[0] * b[1] - k[1] * b[0],
    ];
    for a in 0..3 {
        let e_par = kde * k[a];
        let b_par = kdb * k[a];
        let e_new = e_par + cos * (e[a] - e_par) + sinc * i * kxb[a];
        let b_new = b_par + cos * (b[a] - b_par) - sinc * i * kxe[a];
        e[a] = e_new;
        b[a] = b_new;
    }
}

/// Free-field group `U(t)` applied mode-wise to the whole state.
pub fn apply_u(state: &EMState, t: f64) -> EMState {
    let grid = state.grid().clone();
    let eps = k_epsilon(&grid);
    let mut e = state.e.clone();
    let mut b = state.b.clone();
    for (idx, k) in grid.iter_k() {
        propagate_mode(k, t, eps, &mut e.coeff_mut()[idx], &mut b.coeff_mut()[idx]);
    }
    // the rotation is real-structure preserving; clean up drift anyway
    if e.is_real() {
        e.symmetrize();
        b.symmetrize();
    }
    EMState { e, b }
}

/// Particle drift `W(t) (xi, v) = (xi + t v, v)`.
#[inline]
pub fn apply_w(xi: [f64; 3], v: [f64; 3], t: f64) -> ([f64; 3], [f64; 3]) {
    ([xi[0] + t * v[0], xi[1] + t * v[1], xi[2] + t * v[2]], v)
}

/// Relative norm of `omega^s U(t) f - U(t) omega^s f`.
pub fn commutator_check(state: &EMState, s: f64, t: f64) -> f64 {
    let a = apply_u(
        &EMState { e: state.e.apply_omega_power(s), b: state.b.apply_omega_power(s) },
        t,
    );
    let pre = apply_u(state, t);
    let b = EMState { e: pre.e.apply_omega_power(s), b: pre.b.apply_omega_power(s) };
    let diff = (a.e.sub(&b.e).hs_seminorm(0.0).powi(2) + a.b.sub(&b.b).hs_seminorm(0.0).powi(2)).sqrt();
    let scale = (a.hs_seminorm_sq(0.0)).sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
