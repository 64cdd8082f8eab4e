//! Fixed-point time stepping: the mild-solution map is contracted on a
//! Chebyshev collocation grid over one certified interval at a time, and
//! intervals are chained to march arbitrary spans.
//!
//! The Duhamel integral is evaluated in the interaction picture: source
//! samples are pulled back to the interval anchor with the free group, the
//! running integral is a dense collocation matrix, and the result is pushed
//! forward per output node. All free-field motion is therefore exact; only
//! the source quadrature carries discretization error, and it converges
//! spectrally in the node count.

use std::sync::Arc;

use crate::charge::ChargeProfile;
use crate::cheb::ChebInterval;
use crate::error::{Error, Result};
use crate::model::{current_for_model, model_velocity, particle_rhs, ModelKind, ParticleState};
use crate::propagator::{apply_u, k_epsilon, propagate_mode, EMState};
use crate::spectral::{dot3, Grid, SpectralField3};

#[derive(Debug, Clone)]
pub struct SystemState {
    pub particle: ParticleState,
    pub em: EMState,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PicardParams {
    /// Sobolev index of the contraction norm.
    pub s: f64,
    /// Fraction of the certified step actually taken.
    pub eta: f64,
    /// Chebyshev degree per interval (q + 1 nodes).
    pub q: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardParams {
    fn default() -> Self {
        PicardParams { s: 0.0, eta: 0.9, q: 8, tol: 1e-10, max_iter: 50 }
    }
}

/// Certified contraction step for data of norm `rho`, charge magnitude
/// `e_abs`, and profile norm-table maximum `m`. Infinite for a free field.
///
/// Two constraints are intersected: the self-map bound on the ball of radius
/// `2 rho` (solved at contraction constant 1), and the constant-1/2 bound
/// `(T + 1)(sqrt(2) + 2 T c) = 2` with `c = e_abs m (16 rho^2 + 5)`.
pub fn step_size(e_abs: f64, m: f64, rho: f64) -> f64 {
    let c = e_abs * m * (16.0 * rho * rho + 5.0);
    if c == 0.0 {
        return f64::INFINITY;
    }
    // T(T+1) c = 1
    let t_c = 0.5 * ((1.0 + 4.0 / c).sqrt() - 1.0);
    // 2c T^2 + (2c + sqrt(2)) T + sqrt(2) - 2 = 0
    let s2 = std::f64::consts::SQRT_2;
    let (a, b, d) = (2.0 * c, 2.0 * c + s2, s2 - 2.0);
    let t_a = (-b + (b * b - 4.0 * a * d).sqrt()) / (2.0 * a);
    t_a.min(0.5 * t_c)
}

/// Picard iterate over one collocation interval. `states[i0]` sits at the
/// anchor time where the initial data lives.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub interval: ChebInterval,
    pub i0: usize,
    pub states: Vec<SystemState>,
}

impl Trajectory {
    pub fn anchor_time(&self) -> f64 {
        self.interval.nodes()[self.i0]
    }
}

/// Per-mode `|k|^{2s}` weights of the seminorm, `k = 0` kept only at `s = 0`.
fn sobolev_weights(grid: &Arc<Grid>, s: f64) -> Vec<f64> {
    grid.iter_k()
        .map(|(_, k)| {
            let ksq = dot3(k, k);
            if ksq == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                ksq.powf(s)
            }
        })
        .collect()
}

fn em_weighted_sq(em: &EMState, w: &[f64], vol: f64) -> f64 {
    let mut sum = 0.0;
    for (idx, &wt) in w.iter().enumerate() {
        if wt == 0.0 {
            continue;
        }
        sum += wt
            * (crate::spectral::vec3_norm_sq_c(&em.e.coeff()[idx])
                + crate::spectral::vec3_norm_sq_c(&em.b.coeff()[idx]));
    }
    vol * sum
}

fn em_diff_weighted_sq(a: &EMState, b: &EMState, w: &[f64], vol: f64) -> f64 {
    let mut sum = 0.0;
    for (idx, &wt) in w.iter().enumerate() {
        if wt == 0.0 {
            continue;
        }
        let mut d = 0.0;
        for c in 0..3 {
            d += (a.e.coeff()[idx][c] - b.e.coeff()[idx][c]).norm_sqr();
            d += (a.b.coeff()[idx][c] - b.b.coeff()[idx][c]).norm_sqr();
        }
        sum += wt * d;
    }
    vol * sum
}

fn particle_sq(model: ModelKind, ps: &ParticleState) -> f64 {
    let mut n = dot3(ps.xi, ps.xi) + dot3(ps.momentum, ps.momentum);
    if model == ModelKind::Rotating {
        n += dot3(ps.omega, ps.omega);
    }
    n
}

fn particle_diff_sq(model: ModelKind, a: &ParticleState, b: &ParticleState) -> f64 {
    let dxi = [a.xi[0] - b.xi[0], a.xi[1] - b.xi[1], a.xi[2] - b.xi[2]];
    let dm = [
        a.momentum[0] - b.momentum[0],
        a.momentum[1] - b.momentum[1],
        a.momentum[2] - b.momentum[2],
    ];
    let mut n = dot3(dxi, dxi) + dot3(dm, dm);
    if model == ModelKind::Rotating {
        let dom = [a.omega[0] - b.omega[0], a.omega[1] - b.omega[1], a.omega[2] - b.omega[2]];
        n += dot3(dom, dom);
    }
    n
}

impl SystemState {
    /// Phase-space norm driving the step certificate: particle coordinates
    /// plus the field seminorms of index `s`.
    pub fn xs_norm(&self, model: ModelKind, s: f64) -> f64 {
        let w = sobolev_weights(self.em.grid(), s);
        let vol = self.em.grid().volume();
        (particle_sq(model, &self.particle) + em_weighted_sq(&self.em, &w, vol)).sqrt()
    }

    pub fn distance(&self, other: &SystemState, model: ModelKind, s: f64) -> f64 {
        let w = sobolev_weights(self.em.grid(), s);
        let vol = self.em.grid().volume();
        (particle_diff_sq(model, &self.particle, &other.particle)
            + em_diff_weighted_sq(&self.em, &other.em, &w, vol))
        .sqrt()
    }
}

/// Exact free flow from `u` over `dt`: fields by the unitary group, the
/// particle by straight-line transport at its model velocity.
pub fn free_flight(model: ModelKind, u: &SystemState, dt: f64) -> SystemState {
    let v = model_velocity(model, &u.particle);
    let mut p = u.particle;
    for a in 0..3 {
        p.xi[a] += dt * v[a];
    }
    SystemState { particle: p, em: apply_u(&u.em, dt) }
}

/// One application of the mild-solution map to an iterate: sources are read
/// off `traj`, initial data from `u0` anchored at node `i0`.
pub fn apply_a(
    profile: &ChargeProfile,
    model: ModelKind,
    u0: &SystemState,
    traj: &Trajectory,
) -> Result<Vec<SystemState>> {
    let nodes = traj.interval.nodes().to_vec();
    let nn = nodes.len();
    let i0 = traj.i0;
    let t0 = nodes[i0];
    let grid = u0.em.grid().clone();
    let eps_k = k_epsilon(&grid);

    // source samples: pulled-back field source and particle derivative
    let mut pulled: Vec<EMState> = Vec::with_capacity(nn);
    let mut deriv = Vec::with_capacity(nn);
    for j in 0..nn {
        let st = &traj.states[j];
        let jf = current_for_model(model, profile, &grid, &st.particle)?;
        let mut g = EMState { e: jf.scaled(-1.0), b: SpectralField3::zero(&grid) };
        let dt = t0 - nodes[j];
        if dt != 0.0 {
            for idx in 0..grid.mode_count() {
                let k = grid.wavevector(idx);
                let mut ec = g.e.coeff()[idx];
                let mut bc = g.b.coeff()[idx];
                propagate_mode(k, dt, eps_k, &mut ec, &mut bc);
                g.e.coeff_mut()[idx] = ec;
                g.b.coeff_mut()[idx] = bc;
            }
        }
        pulled.push(g);
        deriv.push(particle_rhs(model, profile, &st.em, &st.particle)?);
    }

    // running-integral weights from the anchor node
    let rows: Vec<Vec<f64>> = (0..nn)
        .map(|i| {
            let ri = traj.interval.integration_row(i);
            let r0 = traj.interval.integration_row(i0);
            (0..nn).map(|j| ri[j] - r0[j]).collect()
        })
        .collect();

    let mut out = Vec::with_capacity(nn);
    for i in 0..nn {
        let dt_i = nodes[i] - t0;
        let w = &rows[i];

        // field part: u0 + integral of pulled-back sources, pushed forward
        let mut acc = u0.em.clone();
        for j in 0..nn {
            if w[j] != 0.0 {
                acc.e.add_scaled(&pulled[j].e, w[j]);
                acc.b.add_scaled(&pulled[j].b, w[j]);
            }
        }
        let em_i = if dt_i != 0.0 { apply_u(&acc, dt_i) } else { acc };

        // particle part
        let mut f_int = [0.0f64; 3];
        let mut tf_int = [0.0f64; 3];
        let mut v_int = [0.0f64; 3];
        let mut tq_int = [0.0f64; 3];
        for j in 0..nn {
            let tau = nodes[j] - t0;
            for a in 0..3 {
                f_int[a] += w[j] * deriv[j].dmomentum[a];
                tf_int[a] += w[j] * tau * deriv[j].dmomentum[a];
                v_int[a] += w[j] * deriv[j].dxi[a];
                tq_int[a] += w[j] * deriv[j].domega[a];
            }
        }
        let mut p = u0.particle;
        match model {
            ModelKind::Newton => {
                // literal kicked free flight: xi picks up (t - tau) f(tau)
                for a in 0..3 {
                    p.xi[a] += dt_i * p.momentum[a] + dt_i * f_int[a] - tf_int[a];
                    p.momentum[a] += f_int[a];
                }
            }
            ModelKind::Abraham => {
                for a in 0..3 {
                    p.xi[a] += v_int[a];
                    p.momentum[a] += f_int[a];
                }
            }
            ModelKind::Rotating => {
                for a in 0..3 {
                    p.xi[a] += v_int[a];
                    p.momentum[a] += f_int[a];
                    p.omega[a] += tq_int[a];
                }
            }
        }
        out.push(SystemState { particle: p, em: em_i });
    }
    Ok(out)
}

#[derive(Debug)]
pub struct LocalSolve {
    pub traj: Trajectory,
    pub iterations: usize,
    pub decrement: f64,
    /// Last observed successive-decrement ratio.
    pub contraction: f64,
}

/// Contract the mild-solution map on `[t0, t1]` (either orientation) from
/// data `u0` at `t0`. The interval must sit inside the certified step; the
/// ball `|u| <= 2 rho` is enforced on every iterate.
pub fn local_solve(
    profile: &ChargeProfile,
    model: ModelKind,
    u0: &SystemState,
    t0: f64,
    t1: f64,
    params: &PicardParams,
) -> Result<LocalSolve> {
    if t1 == t0 {
        return Err(Error::ModelConfig("empty Picard interval".into()));
    }
    let (lo, hi) = if t1 > t0 { (t0, t1) } else { (t1, t0) };
    let interval = ChebInterval::new(lo, hi, params.q);
    let i0 = if t1 > t0 { 0 } else { params.q };
    let nodes = interval.nodes().to_vec();

    let rho = u0.xs_norm(model, params.s);
    let ball = 2.0 * rho + 1e-9 * (1.0 + rho);

    let states: Vec<SystemState> =
        nodes.iter().map(|&t| free_flight(model, u0, t - t0)).collect();
    let mut traj = Trajectory { interval, i0, states };

    let mut prev_dec = f64::INFINITY;
    let mut contraction = f64::NAN;
    for iter in 1..=params.max_iter {
        let new_states = apply_a(profile, model, u0, &traj)?;
        let mut dec = 0.0f64;
        for (a, b) in new_states.iter().zip(&traj.states) {
            dec = dec.max(a.distance(b, model, params.s));
        }
        for st in &new_states {
            let n = st.xs_norm(model, params.s);
            if n > ball {
                return Err(Error::BallViolation { norm: n, limit: ball });
            }
        }
        traj.states = new_states;
        contraction = dec / prev_dec;
        prev_dec = dec;
        if dec <= params.tol * (1.0 + rho) {
            return Ok(LocalSolve { traj, iterations: iter, decrement: dec, contraction });
        }
    }
    Err(Error::NoConvergence {
        max_iter: params.max_iter,
        decrement: prev_dec,
        contraction,
    })
}

/// Empirical contraction factor `d(A u, A v) / d(u, v)` of the map anchored
/// at `u0` for two iterates sharing the same interval.
pub fn contraction_factor(
    profile: &ChargeProfile,
    model: ModelKind,
    u0: &SystemState,
    a: &Trajectory,
    b: &Trajectory,
    s: f64,
) -> Result<f64> {
    let fa = apply_a(profile, model, u0, a)?;
    let fb = apply_a(profile, model, u0, b)?;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..fa.len() {
        num = num.max(fa[i].distance(&fb[i], model, s));
        den = den.max(a.states[i].distance(&b.states[i], model, s));
    }
    if den == 0.0 {
        return Err(Error::ModelConfig("identical iterates have no contraction ratio".into()));
    }
    Ok(num / den)
}

/// Restart alignment grid for checkpoint-compatible marching: interval
/// boundaries are forced onto `origin + n * period` so a run split at a
/// checkpoint retraces the unsplit run's arithmetic exactly.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Cadence {
    pub origin: f64,
    pub period: f64,
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct StepRecord {
    pub t_start: f64,
    pub t_end: f64,
    pub rho: f64,
    pub certified: f64,
    pub iterations: usize,
    pub decrement: f64,
}

#[derive(Debug)]
pub struct GlobalSolve {
    pub state: SystemState,
    pub steps: Vec<StepRecord>,
}

/// March from `(t0, u0)` to `t_end` by chained certified steps. `observer`
/// sees every accepted collocation node in time order, starting with the
/// initial datum.
pub fn global_solve(
    profile: &ChargeProfile,
    model: ModelKind,
    u0: &SystemState,
    t0: f64,
    t_end: f64,
    params: &PicardParams,
    cadence: Option<Cadence>,
    mut observer: impl FnMut(f64, &SystemState),
) -> Result<GlobalSolve> {
    let m = profile.norm_table(params.s)?.m;
    let mut state = u0.clone();
    let mut t = t0;
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    observer(t, &state);
    let mut steps = Vec::new();

    while (t_end - t) * dir > 1e-13 * (1.0 + t_end.abs()) {
        let rho = state.xs_norm(model, params.s);
        let certified = step_size(profile.e.abs(), m, rho);
        let h = if certified.is_finite() { params.eta * certified } else { (t_end - t).abs() };
        if h < 1e-12 {
            return Err(Error::StepUnderflow { step: h, rho });
        }
        let mut t_next = t + dir * h;
        if (t_end - t_next) * dir < 0.0 {
            t_next = t_end;
        }
        if let Some(c) = cadence {
            let k = (((t - c.origin) * dir) / c.period + 1e-9).floor() + 1.0;
            let b = c.origin + dir * k * c.period;
            if (b - t_next) * dir < 0.0 {
                t_next = b;
            }
        }
        let ls = local_solve(profile, model, &state, t, t_next, params)?;
        let nn = ls.traj.interval.node_count();
        let order: Box<dyn Iterator<Item = usize>> =
            if dir > 0.0 { Box::new(1..nn) } else { Box::new((0..nn - 1).rev()) };
        for i in order {
            observer(ls.traj.interval.nodes()[i], &ls.traj.states[i]);
        }
        let end_idx = if dir > 0.0 { nn - 1 } else { 0 };
        steps.push(StepRecord {
            t_start: t,
            t_end: t_next,
            rho,
            certified,
            iterations: ls.iterations,
            decrement: ls.decrement,
        });
        state = ls.traj.states[end_idx].clone();
        t = t_next;
    }
    Ok(GlobalSolve { state, steps })
}
