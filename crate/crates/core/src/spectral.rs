//! Periodic-grid Fourier representation of scalar and 3-vector fields.
//!
//! A field is stored as complex amplitudes `c(k)` of `e^{i k.x}` on the cube
//! `[-L/2, L/2)^3`, with wavevectors `k = 2 pi n / L`, `n` in
//! `{-N/2, ..., N/2 - 1}^3` in FFT index order (index 0 is `k = 0`).
//! With this convention the L2 norm is `(L^3 sum |c|^2)^{1/2}`; every norm,
//! convolution and smearing in the crate uses it.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub const CONJ_SYM_TOL: f64 = 1e-13;

/// Periodic grid: box edge `L`, `N` modes per axis (`N` even, `>= 4`).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    l: f64,
    n: usize,
    /// Per-axis wavenumbers in storage order.
    k_axis: Vec<f64>,
}

impl Grid {
    pub fn new(l: f64, n: usize) -> Result<Arc<Grid>> {
        if !(l > 0.0) {
            return Err(Error::InvalidGrid(format!("box length L = {l} must be positive")));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!("N = {n} too small, need N >= 4")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("N = {n} must be even")));
        }
        let dk = 2.0 * std::f64::consts::PI / l;
        let k_axis = (0..n).map(|i| dk * Self::mode_of(i, n) as f64).collect();
        Ok(Arc::new(Grid { l, n, k_axis }))
    }

    #[inline]
    fn mode_of(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    #[inline]
    pub fn edge(&self) -> f64 {
        self.l
    }

    #[inline]
    pub fn modes_per_axis(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mode_count(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn volume(&self) -> f64 {
        self.l * self.l * self.l
    }

    /// Wavevector at flat index `idx = (ix*N + iy)*N + iz`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let iz = idx % n;
        let iy = (idx / n) % n;
        let ix = idx / (n * n);
        [self.k_axis[ix], self.k_axis[iy], self.k_axis[iz]]
    }

    #[inline]
    pub fn flat(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Flat index of the mode with integer components `m` (periodically wrapped).
    pub fn index_of_mode(&self, m: [i64; 3]) -> usize {
        let n = self.n as i64;
        let wrap = |x: i64| (((x % n) + n) % n) as usize;
        self.flat(wrap(m[0]), wrap(m[1]), wrap(m[2]))
    }

    /// Flat index of `-k` for the mode at `idx`.
    #[inline]
    pub fn negated_index(&self, idx: usize) -> usize {
        let n = self.n;
        let iz = idx % n;
        let iy = (idx / n) % n;
        let ix = idx / (n * n);
        let neg = |i: usize| if i == 0 { 0 } else { n - i };
        self.flat(neg(ix), neg(iy), neg(iz))
    }

    pub fn iter_k(&self) -> impl Iterator<Item = (usize, [f64; 3])> + '_ {
        (0..self.mode_count()).map(move |i| (i, self.wavevector(i)))
    }

    /// True if any axis of the mode at `idx` sits on the unpaired Nyquist
    /// wavenumber `-N/2`. Real fields cannot carry independent data there.
    #[inline]
    pub fn has_nyquist(&self, idx: usize) -> bool {
        let n = self.n;
        let iz = idx % n;
        let iy = (idx / n) % n;
        let ix = idx / (n * n);
        let ny = n / 2;
        ix == ny || iy == ny || iz == ny
    }
}

/// Sobolev exponent: homogeneous `\dot H^s` (`s < 3/2`) or `H^r` (`r >= 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SobolevIndex {
    Homogeneous(f64),
    NonHomogeneous(f64),
}

impl SobolevIndex {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SobolevIndex::Homogeneous(s) if s >= 1.5 => Err(Error::SobolevIndex(format!(
                "homogeneous index s = {s} must be < 3/2"
            ))),
            SobolevIndex::NonHomogeneous(r) if r < 0.0 => Err(Error::SobolevIndex(format!(
                "non-homogeneous index r = {r} must be >= 0"
            ))),
            _ => Ok(()),
        }
    }
}

/// One 3-vector field as complex Fourier amplitudes on a [`Grid`].
#[derive(Debug, Clone)]
pub struct SpectralField3 {
    grid: Arc<Grid>,
    coeff: Vec<[Complex64; 3]>,
    reality: bool,
}

/// Scalar companion of [`SpectralField3`] (charge density, divergences).
#[derive(Debug, Clone)]
pub struct SpectralScalar {
    grid: Arc<Grid>,
    coeff: Vec<Complex64>,
}

impl SpectralField3 {
    pub fn zero(grid: &Arc<Grid>) -> Self {
        SpectralField3 {
            grid: grid.clone(),
            coeff: vec![[Complex64::ZERO; 3]; grid.mode_count()],
            reality: true,
        }
    }

    pub fn from_coeff(grid: &Arc<Grid>, coeff: Vec<[Complex64; 3]>, reality: bool) -> Result<Self> {
        if coeff.len() != grid.mode_count() {
            return Err(Error::FieldMismatch(format!(
                "coefficient array has {} entries, grid has {} modes",
                coeff.len(),
                grid.mode_count()
            )));
        }
        let f = SpectralField3 { grid: grid.clone(), coeff, reality };
        if reality {
            f.check_conjugate_symmetry()?;
        }
        Ok(f)
    }

    #[inline]
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    #[inline]
    pub fn coeff(&self) -> &[[Complex64; 3]] {
        &self.coeff
    }

    #[inline]
    pub fn coeff_mut(&mut self) -> &mut Vec<[Complex64; 3]> {
        &mut self.coeff
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.reality
    }

    pub fn set_reality(&mut self, reality: bool) {
        self.reality = reality;
    }

    pub fn mean_amplitude(&self) -> [Complex64; 3] {
        self.coeff[0]
    }

    pub fn check_conjugate_symmetry(&self) -> Result<()> {
        let scale = self.linf_coeff().max(1.0);
        for idx in 0..self.coeff.len() {
            let neg = self.grid.negated_index(idx);
            for a in 0..3 {
                let d = (self.coeff[idx][a] - self.coeff[neg][a].conj()).norm();
                if d > CONJ_SYM_TOL * scale {
                    return Err(Error::FieldMismatch(format!(
                        "conjugate symmetry violated at mode {idx}: |c(k) - conj(c(-k))| = {d:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Restore exact conjugate symmetry `c(-k) = conj(c(k))` by averaging.
    pub fn symmetrize(&mut self) {
        for idx in 0..self.coeff.len() {
            let neg = self.grid.negated_index(idx);
            if neg < idx {
                continue;
            }
            for a in 0..3 {
                if neg == idx {
                    // self-conjugate mode must be real
                    self.coeff[idx][a] = Complex64::new(self.coeff[idx][a].re, 0.0);
                } else {
                    let avg = 0.5 * (self.coeff[idx][a] + self.coeff[neg][a].conj());
                    self.coeff[idx][a] = avg;
                    self.coeff[neg][a] = avg.conj();
                }
            }
        }
        self.reality = true;
    }

    fn linf_coeff(&self) -> f64 {
        self.coeff
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeff.iter_mut() {
            for v in c.iter_mut() {
                *v *= a;
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &SpectralField3, a: f64) {
        debug_assert_eq!(self.coeff.len(), other.coeff.len());
        for (c, o) in self.coeff.iter_mut().zip(other.coeff.iter()) {
            for i in 0..3 {
                c[i] += a * o[i];
            }
        }
    }

    pub fn sub(&self, other: &SpectralField3) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    /// Homogeneous Sobolev norm `|| f ||_{(\dot H^s)^3}` on the torus.
    ///
    /// `k = 0` contributes only at `s = 0`; for `s < 0` a nonzero mean is
    /// rejected (no finite weight exists for it).
    pub fn hs_norm(&self, s: f64) -> Result<f64> {
        SobolevIndex::Homogeneous(s).validate()?;
        if s < 0.0 {
            let mean = vec3_norm_c(&self.coeff[0]);
            let scale = self.linf_coeff().max(1.0);
            if mean > 1e-13 * scale {
                return Err(Error::NonzeroMean { s, mean });
            }
        }
        Ok(self.hs_seminorm(s))
    }

    /// Same weight sum as [`Self::hs_norm`] but silently dropping `k = 0`
    /// for `s != 0`. Used by run diagnostics where the mean mode is tracked
    /// separately (the torus has no finite `|k|^{2s}` weight for it).
    pub fn hs_seminorm(&self, s: f64) -> f64 {
        let mut sum = 0.0;
        for (idx, k) in self.grid.iter_k() {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let w = if idx == 0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                k2.powf(s)
            };
            if w != 0.0 {
                sum += w * vec3_norm_sq_c(&self.coeff[idx]);
            }
        }
        (self.grid.volume() * sum).sqrt()
    }

    /// Non-homogeneous norm with weight `(1 + |k|^2)^r`, `k = 0` included.
    pub fn sobolev_norm(&self, r: f64) -> Result<f64> {
        SobolevIndex::NonHomogeneous(r).validate()?;
        let mut sum = 0.0;
        for (idx, k) in self.grid.iter_k() {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            sum += (1.0 + k2).powf(r) * vec3_norm_sq_c(&self.coeff[idx]);
        }
        Ok((self.grid.volume() * sum).sqrt())
    }

    /// Apply the homogeneous multiplier `|k|^s` mode-wise (`k = 0` mode
    /// untouched for `s = 0`, zeroed otherwise).
    pub fn apply_omega_power(&self, s: f64) -> Self {
        let mut out = self.clone();
        for (idx, k) in self.grid.iter_k() {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let w = if idx == 0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                k2.powf(0.5 * s)
            };
            for a in 0..3 {
                out.coeff[idx][a] *= w;
            }
        }
        out
    }

    /// Helmholtz split into (divergence-free, gradient) parts.
    ///
    /// Per mode `k != 0` the gradient part is `(k k^T / |k|^2) c(k)`;
    /// the `k = 0` mode goes wholly to the divergence-free part.
    pub fn helmholtz_project(&self) -> (SpectralField3, SpectralField3) {
        let mut div_free = self.clone();
        let mut gradient = SpectralField3::zero(&self.grid);
        gradient.reality = self.reality;
        for (idx, k) in self.grid.iter_k() {
            if idx == 0 {
                continue;
            }
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let c = &self.coeff[idx];
            let kdotc = k[0] * c[0] + k[1] * c[1] + k[2] * c[2];
            for a in 0..3 {
                let grad = kdotc * k[a] / k2;
                gradient.coeff[idx][a] = grad;
                div_free.coeff[idx][a] = c[a] - grad;
            }
        }
        (div_free, gradient)
    }

    /// Divergence `i k . c(k)` as a scalar field.
    pub fn divergence(&self) -> SpectralScalar {
        let mut out = SpectralScalar::zero(&self.grid);
        for (idx, k) in self.grid.iter_k() {
            let c = &self.coeff[idx];
            out.coeff[idx] =
                Complex64::i() * (k[0] * c[0] + k[1] * c[1] + k[2] * c[2]);
        }
        out
    }

    /// Trigonometric interpolation `sum_k c(k) e^{i k.x}` at an off-grid point.
    pub fn eval_at_point(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        if !self.reality {
            return Err(Error::NotReal);
        }
        let mut acc = [Complex64::ZERO; 3];
        for (idx, k) in self.grid.iter_k() {
            let phase = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            for a in 0..3 {
                acc[a] += self.coeff[idx][a] * phase;
            }
        }
        let mag = vec3_norm_c(&acc).max(1.0);
        for a in 0..3 {
            debug_assert!(acc[a].im.abs() <= 1e-12 * mag, "imaginary residue {:.3e}", acc[a].im);
        }
        Ok([acc[0].re, acc[1].re, acc[2].re])
    }

    /// Smooth random mean-zero real field with modes `|n_i| <= kmax_modes`,
    /// coefficient magnitudes decaying like `e^{-|n|^2 / kmax^2}`.
    pub fn random<R: Rng>(grid: &Arc<Grid>, rng: &mut R, kmax_modes: i64, amp: f64) -> Self {
        let mut f = SpectralField3::zero(grid);
        let m_half = (grid.modes_per_axis() / 2) as i64;
        let kmax = kmax_modes.min(m_half - 1).max(1);
        for mx in -kmax..=kmax {
            for my in -kmax..=kmax {
                for mz in -kmax..=kmax {
                    if mx == 0 && my == 0 && mz == 0 {
                        continue;
                    }
                    let idx = grid.index_of_mode([mx, my, mz]);
                    let n2 = (mx * mx + my * my + mz * mz) as f64;
                    let decay = (-n2 / (kmax * kmax) as f64).exp();
                    for a in 0..3 {
                        let re: f64 = rng.gen_range(-1.0..1.0);
                        let im: f64 = rng.gen_range(-1.0..1.0);
                        f.coeff[idx][a] = amp * decay * Complex64::new(re, im);
                    }
                }
            }
        }
        f.symmetrize();
        f
    }
}

impl SpectralScalar {
    pub fn zero(grid: &Arc<Grid>) -> Self {
        SpectralScalar { grid: grid.clone(), coeff: vec![Complex64::ZERO; grid.mode_count()] }
    }

    #[inline]
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    #[inline]
    pub fn coeff(&self) -> &[Complex64] {
        &self.coeff
    }

    #[inline]
    pub fn coeff_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.coeff
    }

    pub fn sub(&self, other: &SpectralScalar) -> Self {
        let mut out = self.clone();
        for (c, o) in out.coeff.iter_mut().zip(other.coeff.iter()) {
            *c -= o;
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeff.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.volume() * sum).sqrt()
    }

    /// Scalar homogeneous seminorm, `k = 0` dropped for `s != 0`.
    pub fn hs_seminorm(&self, s: f64) -> f64 {
        let mut sum = 0.0;
        for (idx, k) in self.grid.iter_k() {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let w = if idx == 0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                k2.powf(s)
            };
            if w != 0.0 {
                sum += w * self.coeff[idx].norm_sqr();
            }
        }
        (self.grid.volume() * sum).sqrt()
    }

    pub fn eval_at_point(&self, x: [f64; 3]) -> f64 {
        let mut acc = Complex64::ZERO;
        for (idx, k) in self.grid.iter_k() {
            let phase = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            acc += self.coeff[idx] * phase;
        }
        acc.re
    }
}

#[inline]
pub fn vec3_norm_sq_c(c: &[Complex64; 3]) -> f64 {
    c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr()
}

#[inline]
pub fn vec3_norm_c(c: &[Complex64; 3]) -> f64 {
    vec3_norm_sq_c(c).sqrt()
}

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
