//! Right-hand-side assembly for the three model variants: Maxwell-Newton,
//! Abraham (semi-relativistic momentum), and the rigid rotating charge.
//!
//! Rotating force and torque integrals are evaluated spectrally: the
//! `(x - xi)` factors become derivatives of `phi_hat` in `k`, supplied by the
//! profile's moment transforms.

use std::sync::Arc;

use num_complex::Complex64;

use crate::charge::{
    current_density, lorentz_force, moment1_smeared, moment2_smeared, smeared_field, ChargeProfile,
};
use crate::error::{Error, Result};
use crate::propagator::EMState;
use crate::spectral::{cross3, dot3, Grid, SpectralField3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Newton,
    Abraham,
    Rotating,
}

/// Particle half of the system state. `momentum` holds `v` for Newton and
/// rotating, `p` for Abraham; `omega` is present only for rotating.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParticleState {
    pub xi: [f64; 3],
    pub momentum: [f64; 3],
    pub omega: [f64; 3],
    pub mass: f64,
    pub inertia: f64,
}

impl ParticleState {
    pub fn newton(xi: [f64; 3], v: [f64; 3]) -> Self {
        ParticleState { xi, momentum: v, omega: [0.0; 3], mass: 1.0, inertia: 1.0 }
    }

    pub fn abraham(xi: [f64; 3], p: [f64; 3]) -> Self {
        ParticleState { xi, momentum: p, omega: [0.0; 3], mass: 1.0, inertia: 1.0 }
    }

    pub fn rotating(xi: [f64; 3], v: [f64; 3], omega: [f64; 3], mass: f64, inertia: f64) -> Self {
        ParticleState { xi, momentum: v, omega, mass, inertia }
    }
}

/// Time derivative of the particle variables.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParticleDeriv {
    pub dxi: [f64; 3],
    pub dmomentum: [f64; 3],
    pub domega: [f64; 3],
}

/// `v = p / sqrt(1 + |p|^2)`; always subluminal.
#[inline]
pub fn velocity_from_momentum(p: [f64; 3]) -> [f64; 3] {
    let g = (1.0 + dot3(p, p)).sqrt();
    [p[0] / g, p[1] / g, p[2] / g]
}

/// Validate a `(model, state, profile)` triple before any stepping.
pub fn validate_model(model: ModelKind, ps: &ParticleState, profile: &ChargeProfile) -> Result<()> {
    if !(ps.mass > 0.0) {
        return Err(Error::ModelConfig(format!("mass {} must be positive", ps.mass)));
    }
    match model {
        ModelKind::Rotating => {
            if !(ps.inertia > 0.0) {
                return Err(Error::ModelConfig(format!(
                    "moment of inertia {} must be positive",
                    ps.inertia
                )));
            }
            if !profile.has_moments() {
                return Err(Error::ModelConfig(
                    "rotating model needs a profile with analytic moment transforms".into(),
                ));
            }
            Ok(())
        }
        ModelKind::Newton | ModelKind::Abraham => Ok(()),
    }
}

/// Translational velocity `xi_dot` for the model.
#[inline]
pub fn model_velocity(model: ModelKind, ps: &ParticleState) -> [f64; 3] {
    match model {
        ModelKind::Abraham => velocity_from_momentum(ps.momentum),
        ModelKind::Newton | ModelKind::Rotating => ps.momentum,
    }
}

/// Torque integral of the rotating model (divided by the moment of inertia
/// by the caller).
pub fn torque(profile: &ChargeProfile, em: &EMState, ps: &ParticleState) -> Result<[f64; 3]> {
    let s1e = moment1_smeared(profile, &em.e, ps.xi)?;
    let s1b = moment1_smeared(profile, &em.b, ps.xi)?;
    let s2b = moment2_smeared(profile, &em.b, ps.xi)?;
    let v = ps.momentum;
    let om = ps.omega;
    let mut t = [0.0f64; 3];
    for a in 0..3 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let eps = levi_civita(a, i, j);
                if eps == 0.0 {
                    continue;
                }
                // int y x E phi
                acc += eps * s1e[i][j];
                // int y x (v x B) phi = int [v (y.B) - B (y.v)] phi, taken
                // component-wise: (y x (v x B))_a = eps_{aij} y_i (v x B)_j
                let vxb_j: f64 = {
                    let mut s = 0.0;
                    for (l, m) in [(0, 1), (1, 2), (2, 0), (1, 0), (2, 1), (0, 2)] {
                        let e2 = levi_civita(j, l, m);
                        if e2 != 0.0 {
                            s += e2 * v[l] * s1b[i][m];
                        }
                    }
                    s
                };
                acc += eps * vxb_j;
                // int y x ((Omega x y) x B) phi = int (Omega x y)(B . y) phi,
                // component a: eps_{aij} Omega_i T_{jl}[B_l]
                for l in 0..3 {
                    acc += eps * om[i] * s2b[j][l][l];
                }
            }
        }
        t[a] = acc;
    }
    Ok(t)
}

#[inline]
fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Full particle derivative for the model.
pub fn particle_rhs(
    model: ModelKind,
    profile: &ChargeProfile,
    em: &EMState,
    ps: &ParticleState,
) -> Result<ParticleDeriv> {
    match model {
        ModelKind::Newton => {
            let f = lorentz_force(profile, em, ps.xi, ps.momentum);
            Ok(ParticleDeriv { dxi: ps.momentum, dmomentum: f, domega: [0.0; 3] })
        }
        ModelKind::Abraham => {
            let v = velocity_from_momentum(ps.momentum);
            let f = lorentz_force(profile, em, ps.xi, v);
            Ok(ParticleDeriv { dxi: v, dmomentum: f, domega: [0.0; 3] })
        }
        ModelKind::Rotating => {
            validate_model(model, ps, profile)?;
            // v_dot = (e/m) int [E + (v + Omega x y) x B] phi dx
            let se = smeared_field(profile, &em.e, ps.xi);
            let sb = smeared_field(profile, &em.b, ps.xi);
            let s1b = moment1_smeared(profile, &em.b, ps.xi)?;
            let v = ps.momentum;
            let om = ps.omega;
            let vxb = cross3(v, sb);
            // int (Omega x y) x B phi = S_a[B].Omega - Omega_a sum_l S_l[B_l]
            let trace_s: f64 = (0..3).map(|l| s1b[l][l]).sum();
            let mut f = [0.0f64; 3];
            for a in 0..3 {
                let s_dot_om: f64 = (0..3).map(|l| s1b[a][l] * om[l]).sum();
                f[a] = profile.e / ps.mass * (se[a] + vxb[a] + s_dot_om - om[a] * trace_s);
            }
            let tq = torque(profile, em, ps)?;
            let domega = [
                profile.e * tq[0] / ps.inertia,
                profile.e * tq[1] / ps.inertia,
                profile.e * tq[2] / ps.inertia,
            ];
            Ok(ParticleDeriv { dxi: v, dmomentum: f, domega })
        }
    }
}

/// Source current of the model, including the rotational term.
pub fn current_for_model(
    model: ModelKind,
    profile: &ChargeProfile,
    grid: &Arc<Grid>,
    ps: &ParticleState,
) -> Result<SpectralField3> {
    match model {
        ModelKind::Newton => Ok(current_density(profile, grid, ps.xi, ps.momentum)),
        ModelKind::Abraham => Ok(current_density(
            profile,
            grid,
            ps.xi,
            velocity_from_momentum(ps.momentum),
        )),
        ModelKind::Rotating => {
            let mut j = current_density(profile, grid, ps.xi, ps.momentum);
            // rotational part: coefficients e/L^3 e^{-ik.xi} Omega x m1(k) phi-ish,
            // with m1 the transform factor of y_i phi
            let vol = grid.volume();
            let om = ps.omega;
            for (idx, k) in grid.iter_k() {
                let m1 = profile.moment1_factor(k).ok_or_else(|| {
                    Error::ModelConfig("rotating current needs first-moment transforms".into())
                })?;
                let base = profile.e * profile.fourier_grid(grid, idx, k) / vol
                    * Complex64::from_polar(1.0, -dot3(k, ps.xi));
                let oxm = [
                    om[1] * m1[2] - om[2] * m1[1],
                    om[2] * m1[0] - om[0] * m1[2],
                    om[0] * m1[1] - om[1] * m1[0],
                ];
                for a in 0..3 {
                    j.coeff_mut()[idx][a] += base * oxm[a];
                }
            }
            Ok(j)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadcheck;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn velocity_from_momentum_cases() {
        assert_eq!(velocity_from_momentum([0.0; 3]), [0.0; 3]);
        let v = velocity_from_momentum([3.0, 0.0, 0.0]);
        assert_relative_eq!(v[0], 3.0 / 10.0f64.sqrt(), max_relative = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        use rand::Rng;
        for _ in 0..20 {
            let dir: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = crate::spectral::norm3(dir).max(1e-3);
            let p = [dir[0] / n * 1e6, dir[1] / n * 1e6, dir[2] / n * 1e6];
            assert!(crate::spectral::norm3(velocity_from_momentum(p)) < 1.0);
        }
    }

    #[test]
    fn newton_rhs_free_particle() {
        let grid = Grid::new(16.0, 8).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let em = EMState::zero(&grid);
        let ps = ParticleState::newton([0.1, 0.2, 0.3], [1.0, -2.0, 0.5]);
        let d = particle_rhs(ModelKind::Newton, &phi, &em, &ps).unwrap();
        assert_eq!(d.dxi, ps.momentum);
        assert_eq!(d.dmomentum, [0.0; 3]);
    }

    #[test]
    fn rotating_uniform_field_even_profile() {
        let grid = Grid::new(16.0, 16).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let mut e = SpectralField3::zero(&grid);
        e.coeff_mut()[0][0] = Complex64::new(0.7, 0.0);
        let em = EMState::new(e, SpectralField3::zero(&grid)).unwrap();
        let ps = ParticleState::rotating([0.3, 0.0, -0.4], [0.0; 3], [0.0; 3], 2.0, 1.5);
        let d = particle_rhs(ModelKind::Rotating, &phi, &em, &ps).unwrap();
        // force = (e/m) E, torque = 0 (first moment of an even profile vanishes)
        assert_relative_eq!(d.dmomentum[0], 0.7 / 2.0, max_relative = 1e-13);
        assert!(d.dmomentum[1].abs() < 1e-15 && d.dmomentum[2].abs() < 1e-15);
        assert!(crate::spectral::norm3(d.domega) < 1e-15);
        // E = B = 0 gives zero torque trivially
        let z = torque(&phi, &EMState::zero(&grid), &ps).unwrap();
        assert_eq!(z, [0.0; 3]);
    }

    #[test]
    fn abraham_rhs_matches_quadrature() {
        let grid = Grid::new(16.0, 32).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = SpectralField3::random(&grid, &mut rng, 2, 1.0);
        let b = SpectralField3::random(&grid, &mut rng, 2, 1.0);
        let em = EMState::new(e, b).unwrap();
        let ps = ParticleState::abraham([0.4, -0.6, 1.1], [0.8, 0.2, -0.5]);
        let d = particle_rhs(ModelKind::Abraham, &phi, &em, &ps).unwrap();
        let v = velocity_from_momentum(ps.momentum);
        let qe = quadcheck::convolve_midpoint(&em.e, 1.0, ps.xi, 48);
        let qb = quadcheck::convolve_midpoint(&em.b, 1.0, ps.xi, 48);
        let vxb = cross3(v, qb);
        for a in 0..3 {
            assert_relative_eq!(d.dmomentum[a], qe[a] + vxb[a], max_relative = 1e-8, epsilon = 1e-9);
            assert_relative_eq!(d.dxi[a], v[a], epsilon = 1e-15);
        }
    }

    #[test]
    fn rotating_rhs_matches_quadrature() {
        let grid = Grid::new(16.0, 32).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let e = SpectralField3::random(&grid, &mut rng, 2, 0.8);
        let b = SpectralField3::random(&grid, &mut rng, 2, 0.8);
        let em = EMState::new(e, b).unwrap();
        let ps = ParticleState::rotating(
            [0.2, 0.5, -0.3],
            [0.3, -0.1, 0.2],
            [0.4, 0.2, -0.6],
            1.3,
            0.7,
        );
        let d = particle_rhs(ModelKind::Rotating, &phi, &em, &ps).unwrap();
        let qf = quadcheck::rotating_force_midpoint(&em.e, &em.b, 1.0, ps.xi, ps.momentum, ps.omega, 48);
        let qt = quadcheck::rotating_torque_midpoint(&em.e, &em.b, 1.0, ps.xi, ps.momentum, ps.omega, 48);
        for a in 0..3 {
            assert_relative_eq!(d.dmomentum[a], qf[a] / ps.mass, max_relative = 1e-6, epsilon = 1e-8);
            assert_relative_eq!(d.domega[a], qt[a] / ps.inertia, max_relative = 1e-6, epsilon = 1e-8);
        }
    }

    #[test]
    fn magnetic_force_does_no_work_every_model() {
        let grid = Grid::new(16.0, 16).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let b = SpectralField3::random(&grid, &mut rng, 3, 1.0);
        let em = EMState::new(SpectralField3::zero(&grid), b).unwrap();
        for model in [ModelKind::Newton, ModelKind::Abraham] {
            let ps = match model {
                ModelKind::Newton => ParticleState::newton([0.1, 0.0, 0.5], [0.4, -0.8, 0.3]),
                _ => ParticleState::abraham([0.1, 0.0, 0.5], [0.4, -0.8, 0.3]),
            };
            let d = particle_rhs(model, &phi, &em, &ps).unwrap();
            let v = model_velocity(model, &ps);
            let scale = crate::spectral::norm3(d.dmomentum).max(1.0) * crate::spectral::norm3(v).max(1.0);
            assert!(dot3(d.dmomentum, v).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn current_reductions() {
        let grid = Grid::new(16.0, 16).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let ps = ParticleState::newton([0.3, 0.1, -0.2], [0.5, 0.0, 0.2]);
        let j1 = current_for_model(ModelKind::Newton, &phi, &grid, &ps).unwrap();
        let j2 = current_density(&phi, &grid, ps.xi, ps.momentum);
        assert!(j1.sub(&j2).hs_seminorm(0.0) == 0.0);

        // rotating with Omega = 0 reduces to the translational current
        let psr = ParticleState::rotating(ps.xi, ps.momentum, [0.0; 3], 1.0, 1.0);
        let j3 = current_for_model(ModelKind::Rotating, &phi, &grid, &psr).unwrap();
        assert!(j3.sub(&j2).hs_seminorm(0.0) <= 1e-15);
    }

    #[test]
    fn rotating_current_is_divergence_consistent() {
        // v = 0, Omega = (0, 0, w): the rotational current is divergence-free
        let grid = Grid::new(16.0, 32).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let ps = ParticleState::rotating([0.4, -0.2, 0.9], [0.0; 3], [0.0, 0.0, 1.3], 1.0, 1.0);
        let j = current_for_model(ModelKind::Rotating, &phi, &grid, &ps).unwrap();
        // continuity: d_t rho = 0 here (xi fixed), so need div j = 0
        let div = j.divergence();
        assert!(div.l2_norm() <= 1e-12);
        // real field check: j at a point equals e (Omega x y) phi_per(y)
        let x = [1.4, 0.3, 0.9];
        let got = j.eval_at_point(x).unwrap();
        let y = [x[0] - ps.xi[0], x[1] - ps.xi[1], x[2] - ps.xi[2]];
        let phi_val = quadcheck::gaussian_periodic(y, 1.0, 16.0);
        let oxy = cross3(ps.omega, y);
        for a in 0..3 {
            assert_relative_eq!(got[a], oxy[a] * phi_val, max_relative = 1e-6, epsilon = 1e-8);
        }
    }

    #[test]
    fn model_dispatch_is_total() {
        let grid = Grid::new(16.0, 8).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let bad_mass = ParticleState { mass: 0.0, ..ParticleState::newton([0.0; 3], [0.0; 3]) };
        assert!(validate_model(ModelKind::Newton, &bad_mass, &phi).is_err());
        let bad_inertia =
            ParticleState { inertia: -1.0, ..ParticleState::rotating([0.0; 3], [0.0; 3], [0.0; 3], 1.0, 1.0) };
        assert!(validate_model(ModelKind::Rotating, &bad_inertia, &phi).is_err());
        // tabulated profile cannot drive the rotating model
        let table: Vec<f64> = grid.iter_k().map(|(_, k)| phi.fourier(k)).collect();
        let tab = ChargeProfile::tabulated(&grid, table, 1e-12, 1.0).unwrap();
        let ok = ParticleState::rotating([0.0; 3], [0.0; 3], [0.0; 3], 1.0, 1.0);
        assert!(validate_model(ModelKind::Rotating, &ok, &tab).is_err());
        assert!(validate_model(ModelKind::Rotating, &ok, &phi).is_ok());
    }
}
