//! Conserved quantities, a-priori growth envelopes, and randomized checks of
//! the interpolation inequalities behind the contraction estimate.

use std::sync::Arc;

use rand::Rng;

use crate::charge::{current_density, smeared_field, ChargeProfile};
use crate::error::Result;
use crate::model::ModelKind;
use crate::picard::SystemState;
use crate::propagator::EMState;
use crate::spectral::{cross3, dot3, Grid, SobolevIndex, SpectralField3};

/// Total energy: kinetic part by model plus `(|E|^2 + |B|^2)_{L^2} / 2`.
/// Conserved along exact solutions; drift measures solver quadrature error.
pub fn energy(model: ModelKind, u: &SystemState) -> f64 {
    let p = &u.particle;
    let kinetic = match model {
        ModelKind::Newton => 0.5 * p.mass * dot3(p.momentum, p.momentum),
        ModelKind::Abraham => p.mass * ((1.0 + dot3(p.momentum, p.momentum)).sqrt() - 1.0),
        ModelKind::Rotating => {
            0.5 * p.mass * dot3(p.momentum, p.momentum) + 0.5 * p.inertia * dot3(p.omega, p.omega)
        }
    };
    kinetic + 0.5 * u.em.hs_seminorm_sq(0.0)
}

/// `v^2 + |E|^2_{H-dot-s} + |B|^2_{H-dot-s}`: the quantity obeying a plain
/// exponential envelope, with no secular `1 + dt^2` prefactor.
pub fn reduced_norm_sq(u: &SystemState, s: f64) -> f64 {
    dot3(u.particle.momentum, u.particle.momentum) + u.em.hs_seminorm_sq(s)
}

/// A-priori growth envelope anchored at `(t0, u(t0))`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct GrowthCertificate {
    pub t0: f64,
    /// Full phase-space norm squared at `t0`.
    pub norm0_sq: f64,
    /// Reduced norm squared at `t0` (no particle position).
    pub reduced0_sq: f64,
    pub rate: f64,
}

impl GrowthCertificate {
    /// Envelope in the homogeneous index `s`:
    /// rate `|e| (1 + 6 |phi|^2_{H-dot-s} + 3 |phi|^2_{H-dot-(-s)})`.
    pub fn xs(
        profile: &ChargeProfile,
        model: ModelKind,
        u: &SystemState,
        t0: f64,
        s: f64,
    ) -> Result<Self> {
        let np = profile.norm(SobolevIndex::Homogeneous(s))?;
        let nm = profile.norm(SobolevIndex::Homogeneous(-s))?;
        let rate = profile.e.abs() * (1.0 + 6.0 * np * np + 3.0 * nm * nm);
        let n = u.xs_norm(model, s);
        Ok(GrowthCertificate { t0, norm0_sq: n * n, reduced0_sq: reduced_norm_sq(u, s), rate })
    }

    /// Envelope in the non-homogeneous index `r >= 0`:
    /// rate `|e| (1 + 9 |phi|^2_{H^r})`.
    pub fn hr(
        profile: &ChargeProfile,
        _model: ModelKind,
        u: &SystemState,
        t0: f64,
        r: f64,
    ) -> Result<Self> {
        let n_hr = profile.norm(SobolevIndex::NonHomogeneous(r))?;
        let rate = profile.e.abs() * (1.0 + 9.0 * n_hr * n_hr);
        Ok(GrowthCertificate {
            t0,
            norm0_sq: hr_full_norm_sq(u, r),
            reduced0_sq: hr_norm_sq(&u.em, r) + dot3(u.particle.momentum, u.particle.momentum),
            rate,
        })
    }

    /// Bound on the full phase-space norm squared at time `t`.
    pub fn bound(&self, t: f64) -> f64 {
        let dt = (t - self.t0).abs();
        (1.0 + dt * dt) * (self.rate * dt).exp() * self.norm0_sq
    }

    /// Bound on the reduced norm squared at time `t`.
    pub fn reduced_bound(&self, t: f64) -> f64 {
        (self.rate * (t - self.t0).abs()).exp() * self.reduced0_sq
    }
}

/// L2 residual of the continuity identity `d rho / dt + div j = 0`, i.e.
/// `|k . j(k) - (k . v) rho(k)|` summed over modes. Holds to rounding for
/// every model: the translational current is `v rho` mode by mode and the
/// rotating correction is divergence-free.
pub fn continuity_residual(profile: &ChargeProfile, model: ModelKind, u: &SystemState) -> f64 {
    let grid = u.em.grid();
    let v = crate::model::model_velocity(model, &u.particle);
    let rho = crate::charge::charge_density(profile, grid, u.particle.xi);
    let j = crate::model::current_for_model(model, profile, grid, &u.particle)
        .expect("current available for validated models");
    let mut sum = 0.0;
    for (idx, k) in grid.iter_k() {
        let jc = &j.coeff()[idx];
        let kj = k[0] * jc[0] + k[1] * jc[1] + k[2] * jc[2];
        let r = kj - dot3(k, v) * rho.coeff()[idx];
        sum += r.norm_sqr();
    }
    (grid.volume() * sum).sqrt()
}

/// Full phase-space norm squared in the non-homogeneous index `r`:
/// `|xi|^2 + v^2 + (|E|^2 + |B|^2)_{H^r}`. The quantity the Hr certificate
/// bounds.
pub fn hr_full_norm_sq(u: &SystemState, r: f64) -> f64 {
    dot3(u.particle.xi, u.particle.xi)
        + dot3(u.particle.momentum, u.particle.momentum)
        + hr_norm_sq(&u.em, r)
}

/// `|E|^2 + |B|^2` in `H^r`, lifted over both fields.
pub fn hr_norm_sq(em: &EMState, r: f64) -> f64 {
    let mut sum = 0.0;
    for (idx, k) in em.grid().iter_k() {
        let w = (1.0 + dot3(k, k)).powf(r);
        sum += w
            * (crate::spectral::vec3_norm_sq_c(&em.e.coeff()[idx])
                + crate::spectral::vec3_norm_sq_c(&em.b.coeff()[idx]));
    }
    em.grid().volume() * sum
}

/// Worst observed ratio `LHS / RHS` for the three difference estimates, over
/// `samples` random pairs of states. All ratios must stay at or below one.
#[derive(Debug, Clone, Copy)]
pub struct LemmaSuite {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

pub fn lemma_inequality_suite<R: Rng>(
    profile: &ChargeProfile,
    grid: &Arc<Grid>,
    s: f64,
    samples: usize,
    rng: &mut R,
) -> Result<LemmaSuite> {
    let n_s = profile.hdot_norm(s)?;
    let n_s1 = profile.hdot_norm(s + 1.0)?;
    let n_ms = profile.hdot_norm(-s)?;
    let n_ms1 = profile.hdot_norm(-s + 1.0)?;
    // unit-charge twin of the profile: the estimates carry no charge factor
    let phi = ChargeProfile::gaussian(profile.sigma().expect("lemma suite needs a gaussian"), 1.0)?;

    let mut worst = LemmaSuite { x1: 0.0, x2: 0.0, x3: 0.0 };
    for _ in 0..samples {
        let draw3 = |r: &mut R, a: f64| {
            [r.gen_range(-a..a), r.gen_range(-a..a), r.gen_range(-a..a)]
        };
        let xi1 = draw3(rng, 2.0);
        let xi2 = draw3(rng, 2.0);
        let v1 = draw3(rng, 1.0);
        let v2 = draw3(rng, 1.0);
        let e1 = SpectralField3::random(grid, rng, 3, 1.0);
        let e2 = SpectralField3::random(grid, rng, 3, 1.0);
        let b1 = SpectralField3::random(grid, rng, 3, 1.0);
        let b2 = SpectralField3::random(grid, rng, 3, 1.0);

        let dxi_sq = {
            let d = [xi1[0] - xi2[0], xi1[1] - xi2[1], xi1[2] - xi2[2]];
            dot3(d, d)
        };
        let dv_sq = {
            let d = [v1[0] - v2[0], v1[1] - v2[1], v1[2] - v2[2]];
            dot3(d, d)
        };
        let v_sup_sq = dot3(v1, v1).max(dot3(v2, v2));

        // X1: current difference in the source norm
        let j1 = current_density(&phi, grid, xi1, v1);
        let j2 = current_density(&phi, grid, xi2, v2);
        let lhs1 = j1.sub(&j2).hs_seminorm(s).powi(2);
        let rhs1 = 2.0 * (dv_sq * n_s * n_s + 3.0 * dxi_sq * v_sup_sq * n_s1 * n_s1);
        worst.x1 = worst.x1.max(lhs1 / rhs1);

        // X2: smeared electric field difference at the two positions
        let w1 = smeared_field(&phi, &e1, xi1);
        let w2 = smeared_field(&phi, &e2, xi2);
        let dw = [w1[0] - w2[0], w1[1] - w2[1], w1[2] - w2[2]];
        let e_sup_sq = e1.hs_seminorm(s).powi(2).max(e2.hs_seminorm(s).powi(2));
        let de_sq = e1.sub(&e2).hs_seminorm(s).powi(2);
        let rhs2 = 2.0 * (dxi_sq * n_ms1 * n_ms1 * e_sup_sq + n_ms * n_ms * de_sq);
        worst.x2 = worst.x2.max(dot3(dw, dw) / rhs2);

        // X3: magnetic force difference
        let u1 = cross3(v1, smeared_field(&phi, &b1, xi1));
        let u2 = cross3(v2, smeared_field(&phi, &b2, xi2));
        let du = [u1[0] - u2[0], u1[1] - u2[1], u1[2] - u2[2]];
        let b_sup_sq = b1.hs_seminorm(s).powi(2).max(b2.hs_seminorm(s).powi(2));
        let db_sq = b1.sub(&b2).hs_seminorm(s).powi(2);
        let rhs3 = 6.0
            * (dv_sq * n_ms * n_ms * b_sup_sq
                + n_ms * n_ms * v_sup_sq * db_sq
                + dxi_sq * n_ms1 * n_ms1 * v_sup_sq * b_sup_sq);
        worst.x3 = worst.x3.max(dot3(du, du) / rhs3);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParticleState;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_state(seed: u64, n: usize) -> (Arc<Grid>, SystemState) {
        let grid = Grid::new(16.0, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let em = EMState::new(
            SpectralField3::random(&grid, &mut rng, 2, 0.3),
            SpectralField3::random(&grid, &mut rng, 2, 0.3),
        )
        .unwrap();
        let ps = ParticleState::newton([0.2, -0.5, 0.8], [0.3, 0.1, -0.2]);
        (grid, SystemState { particle: ps, em })
    }

    #[test]
    fn energy_pieces() {
        let (grid, mut u) = sample_state(1, 8);
        u.em = EMState::zero(&grid);
        u.particle = ParticleState::newton([0.0; 3], [0.6, 0.0, 0.8]);
        assert_relative_eq!(energy(ModelKind::Newton, &u), 0.5, max_relative = 1e-15);
        u.particle = ParticleState::abraham([0.0; 3], [0.0; 3]);
        assert_eq!(energy(ModelKind::Abraham, &u), 0.0);
        u.particle = ParticleState::rotating([0.0; 3], [0.0; 3], [2.0, 0.0, 0.0], 1.0, 0.5);
        assert_relative_eq!(energy(ModelKind::Rotating, &u), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn certificate_reduces_to_data_at_t0() {
        let (_, u) = sample_state(2, 16);
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        for s in [-0.5, 0.0, 1.0] {
            let c = GrowthCertificate::xs(&phi, ModelKind::Newton, &u, 0.3, s).unwrap();
            assert_relative_eq!(c.bound(0.3), c.norm0_sq, max_relative = 1e-15);
            assert!(c.bound(0.5) > c.norm0_sq);
            assert_relative_eq!(c.reduced_bound(0.3), c.reduced0_sq, max_relative = 1e-15);
            // rate is even in s only when the two profile norms swap roles
            assert!(c.rate > phi.e.abs());
        }
        let ch = GrowthCertificate::hr(&phi, ModelKind::Newton, &u, 0.0, 1.0).unwrap();
        assert!(ch.rate > 0.0);
    }

    #[test]
    fn rate_oracle_from_closed_forms() {
        // |e|(1 + 6 |phi|^2_{L^2} + 3 |phi|^2_{L^2}) at s = 0, sigma = 1:
        // |phi|^2_{L^2} = 1 / (8 pi^{3/2})
        let phi = ChargeProfile::gaussian(1.0, 2.0).unwrap();
        let (_, u) = sample_state(3, 8);
        let c = GrowthCertificate::xs(&phi, ModelKind::Newton, &u, 0.0, 0.0).unwrap();
        let nsq = 1.0 / (8.0 * std::f64::consts::PI.powf(1.5));
        assert_relative_eq!(c.rate, 2.0 * (1.0 + 9.0 * nsq), max_relative = 1e-12);
    }

    #[test]
    fn hr_norm_matches_sobolev_norm() {
        let (grid, u) = sample_state(4, 16);
        let direct = u.em.e.sobolev_norm(1.3).unwrap().powi(2)
            + u.em.b.sobolev_norm(1.3).unwrap().powi(2);
        assert_relative_eq!(hr_norm_sq(&u.em, 1.3), direct, max_relative = 1e-12);
        assert!(grid.mode_count() > 0);
    }

    #[test]
    fn continuity_is_exact_for_every_model() {
        let (_, u) = sample_state(7, 16);
        let phi = ChargeProfile::gaussian(1.0, 1.3).unwrap();
        for model in [ModelKind::Newton, ModelKind::Abraham, ModelKind::Rotating] {
            let mut u = u.clone();
            if model == ModelKind::Rotating {
                u.particle =
                    ParticleState::rotating(u.particle.xi, u.particle.momentum, [0.4, -0.2, 0.7], 1.0, 0.5);
            }
            let r = continuity_residual(&phi, model, &u);
            assert!(r <= 1e-12, "{model:?}: continuity residual {r}");
        }
    }

    #[test]
    fn lemma_suite_holds_on_random_samples() {
        let grid = Grid::new(16.0, 16).unwrap();
        let phi = ChargeProfile::gaussian(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for s in [-0.5, 0.0, 1.0] {
            let suite = lemma_inequality_suite(&phi, &grid, s, 25, &mut rng).unwrap();
            assert!(suite.x1 <= 1.0, "X1 ratio {} at s = {s}", suite.x1);
            assert!(suite.x2 <= 1.0, "X2 ratio {} at s = {s}", suite.x2);
            assert!(suite.x3 <= 1.0, "X3 ratio {} at s = {s}", suite.x3);
            assert!(suite.x1 > 0.0 && suite.x2 > 0.0 && suite.x3 > 0.0);
        }
    }
}
