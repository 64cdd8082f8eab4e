//! Gauss-law handling: admissible data has `div E = rho` and `div B = 0`.
//!
//! On the torus the `k = 0` component of `rho` (the total charge over the
//! volume) has no counterpart in `div E`, which always vanishes at `k = 0`;
//! the background is neutralized and all residuals are measured on `k != 0`.

use num_complex::Complex64;

use crate::charge::{charge_density, ChargeProfile};
use crate::propagator::EMState;
use crate::spectral::{dot3, SpectralField3};

/// Longitudinal field sourced by the particle: `E_hat = -i k rho_hat / |k|^2`
/// away from `k = 0`, zero there.
pub fn coulomb_field(
    profile: &ChargeProfile,
    grid: &std::sync::Arc<crate::spectral::Grid>,
    xi: [f64; 3],
) -> SpectralField3 {
    let rho = charge_density(profile, grid, xi);
    let mut out = SpectralField3::zero(grid);
    for (idx, k) in grid.iter_k() {
        let ksq = dot3(k, k);
        if ksq == 0.0 {
            continue;
        }
        let amp = -Complex64::i() * rho.coeff()[idx] / ksq;
        out.coeff_mut()[idx] = [amp * k[0], amp * k[1], amp * k[2]];
    }
    out
}

/// Project arbitrary fields onto the constraint manifold for the particle at
/// `xi`: `B` keeps its solenoidal part, `E` keeps its solenoidal part plus
/// the Coulomb field of the source.
pub fn make_admissible(profile: &ChargeProfile, em: &EMState, xi: [f64; 3]) -> EMState {
    let (e_t, _) = em.e.helmholtz_project();
    let (b_t, _) = em.b.helmholtz_project();
    let mut e = e_t;
    e.add_scaled(&coulomb_field(profile, em.grid(), xi), 1.0);
    EMState { e, b: b_t }
}

/// `L^2` sizes of the two constraint residuals, `k = 0` excluded.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ConstraintReport {
    /// `|div E - rho|_{L^2}` over nonzero modes.
    pub gauss_e: f64,
    /// `|div B|_{L^2}`.
    pub gauss_b: f64,
}

pub fn constraint_report(profile: &ChargeProfile, em: &EMState, xi: [f64; 3]) -> ConstraintReport {
    let grid = em.grid();
    let rho = charge_density(profile, grid, xi);
    let div_e = em.e.divergence();
    let div_b = em.b.divergence();
    let mut ge = 0.0;
    let mut gb = 0.0;
    for (idx, k) in grid.iter_k() {
        gb += div_b.coeff()[idx].norm_sqr();
        if dot3(k, k) == 0.0 {
            continue;
        }
        ge += (div_e.coeff()[idx] - rho.coeff()[idx]).norm_sqr();
    }
    let vol = grid.volume();
    ConstraintReport { gauss_e: (vol * ge).sqrt(), gauss_b: (vol * gb).sqrt() }
}
