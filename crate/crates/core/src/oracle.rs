//! Independent cross-check integrator: an operator-splitting scheme that
//! shares no quadrature machinery with the fixed-point solver.
//!
//! The flow is split into the exact free flow (fields by the unitary group,
//! particle by straight-line transport) and an interaction flow with frozen
//! position. The interaction flow is itself solved in closed form: with
//! `w = (phi * E)(xi)` and `b = (phi * B)(xi)` fixed in space, `(v, w)`
//! obeys a constant-coefficient linear system, and the accumulated
//! displacement integral `q = int v` drives the field update. Strang
//! composition gives order two; a Yoshida triple-jump gives order four.

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::charge::{smeared_field, ChargeProfile};
use crate::error::{Error, Result};
use crate::model::ModelKind;
use crate::picard::{free_flight, SystemState};
use crate::spectral::dot3;

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct OracleConfig {
    pub dt: f64,
    /// 2 (Strang) or 4 (Yoshida composition of Strang).
    pub order: u8,
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::ModelConfig(format!("oracle dt {} must be positive", self.dt)));
        }
        if self.order != 2 && self.order != 4 {
            return Err(Error::ModelConfig(format!(
                "oracle order {} must be 2 or 4",
                self.order
            )));
        }
        Ok(())
    }
}

/// Interaction flow over `h` with `xi` frozen: exact matrix-exponential
/// solution of the coupled `(v, w, q)` system, then the field recoil.
fn kick(profile: &ChargeProfile, u: &mut SystemState, h: f64) {
    let grid = u.em.grid().clone();
    let xi = u.particle.xi;
    let e = profile.e;
    let w0 = smeared_field(profile, &u.em.e, xi);
    let b = smeared_field(profile, &u.em.b, xi);
    let c_phi = profile.self_convolution(&grid);

    // state (v, w, q): v' = e w + e v x b, w' = -e c_phi v, q' = v
    let mut m = SMatrix::<f64, 9, 9>::zeros();
    // v' rows: (v x b)_i
    m[(0, 1)] = e * b[2];
    m[(0, 2)] = -e * b[1];
    m[(1, 0)] = -e * b[2];
    m[(1, 2)] = e * b[0];
    m[(2, 0)] = e * b[1];
    m[(2, 1)] = -e * b[0];
    for a in 0..3 {
        m[(a, 3 + a)] = e;
        m[(3 + a, a)] = -e * c_phi;
        m[(6 + a, a)] = 1.0;
    }
    let expm = (m * h).exp();
    let mut y = SMatrix::<f64, 9, 1>::zeros();
    for a in 0..3 {
        y[a] = u.particle.momentum[a];
        y[3 + a] = w0[a];
    }
    let y1 = expm * y;
    for a in 0..3 {
        u.particle.momentum[a] = y1[a];
    }
    let q = [y1[6], y1[7], y1[8]];

    // E recoil: coefficients lose e phi_hat(k) e^{-i k.xi} q / L^3
    let vol = grid.volume();
    for (idx, k) in grid.iter_k() {
        let amp = e * profile.fourier_grid(&grid, idx, k) / vol
            * Complex64::from_polar(1.0, -dot3(k, xi));
        for a in 0..3 {
            u.em.e.coeff_mut()[idx][a] -= amp * q[a];
        }
    }
}

fn strang(profile: &ChargeProfile, u: &SystemState, h: f64) -> SystemState {
    let mut mid = free_flight(ModelKind::Newton, u, 0.5 * h);
    kick(profile, &mut mid, h);
    free_flight(ModelKind::Newton, &mid, 0.5 * h)
}

fn substep(profile: &ChargeProfile, u: &SystemState, h: f64, order: u8) -> SystemState {
    match order {
        2 => strang(profile, u, h),
        4 => {
            // Yoshida coefficients for a symmetric fourth-order triple jump
            let g1 = 1.0 / (2.0 - 2.0f64.powf(1.0 / 3.0));
            let g2 = -2.0f64.powf(1.0 / 3.0) * g1;
            let a = strang(profile, u, g1 * h);
            let b = strang(profile, &a, g2 * h);
            strang(profile, &b, g1 * h)
        }
        _ => unreachable!("validated"),
    }
}

/// Integrate the translational (Maxwell-Newton) system from `t0` to `t_end`.
/// Only the Newton model is supported; the interaction flow is linear only
/// for a velocity-proportional current.
pub fn reference_solve(
    profile: &ChargeProfile,
    model: ModelKind,
    u0: &SystemState,
    t0: f64,
    t_end: f64,
    cfg: &OracleConfig,
) -> Result<SystemState> {
    cfg.validate()?;
    if model != ModelKind::Newton {
        return Err(Error::ModelConfig(
            "reference oracle covers the Newton model only".into(),
        ));
    }
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(u0.clone());
    }
    let n = (span.abs() / cfg.dt).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut u = u0.clone();
    for _ in 0..n {
        u = substep(profile, &u, h, cfg.order);
    }
    Ok(u)
}
