//! Chebyshev–Gauss–Lobatto collocation on an interval: nodes, barycentric
//! interpolation weights, and the linear map taking samples at the nodes to
//! the antiderivative values `int_{t_c}^{t_j} f` (Clenshaw–Curtis in
//! indefinite form). Everything is dense and tiny (q = 8 by default).

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct ChebInterval {
    /// Node times, ascending; `nodes[0] = a`, `nodes[q] = b`.
    nodes: Vec<f64>,
    center: f64,
    half: f64,
    /// `integral[i][j]`: weight of sample `f_j` in `int_{center}^{nodes[i]} f`.
    integral: DMatrix<f64>,
    /// Barycentric weights for dense output.
    bary: Vec<f64>,
    /// Chebyshev coefficient matrix (samples -> coefficients), kept for
    /// arbitrary-point indefinite integrals.
    to_coeff: DMatrix<f64>,
}

impl ChebInterval {
    pub fn new(a: f64, b: f64, q: usize) -> Self {
        assert!(q >= 2 && b > a);
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // x_j = cos(j pi / q) descending; store ascending in t
        let xs: Vec<f64> = (0..=q)
            .map(|j| -((j as f64) * std::f64::consts::PI / q as f64).cos())
            .collect();
        let nodes: Vec<f64> = xs.iter().map(|x| center + half * x).collect();

        // Vandermonde in the Chebyshev basis: V[j][m] = T_m(x_j)
        let v = DMatrix::from_fn(q + 1, q + 1, |j, m| cheb_t(m, xs[j]));
        let to_coeff = v
            .clone()
            .lu()
            .try_inverse()
            .expect("Chebyshev Vandermonde is invertible");

        // Antiderivative in coefficient space: F = sum b_m T_m with
        // b_1 = a_0 - a_2/2, b_m = (a_{m-1} - a_{m+1}) / (2 m), b_0 = 0.
        let mut anti = DMatrix::zeros(q + 2, q + 1);
        for m in 1..=(q + 1) {
            if m == 1 {
                anti[(1, 0)] = 1.0;
                if q >= 2 {
                    anti[(1, 2)] = -0.5;
                }
            } else {
                anti[(m, m - 1)] = 1.0 / (2.0 * m as f64);
                if m + 1 <= q {
                    anti[(m, m + 1)] -= 1.0 / (2.0 * m as f64);
                }
            }
        }

        // Evaluate antiderivative at the nodes and at x = 0 (the center),
        // subtract, scale by the half-width.
        let eval = DMatrix::from_fn(q + 1, q + 2, |j, m| cheb_t(m, xs[j]));
        let eval0 = DMatrix::from_fn(1, q + 2, |_, m| cheb_t(m, 0.0));
        let ones = DMatrix::from_element(q + 1, 1, 1.0);
        let integral = half * (&eval - &ones * &eval0) * &anti * &to_coeff;

        // Barycentric weights for CGL nodes: w_j = (-1)^j, halved at the ends.
        let mut bary: Vec<f64> = (0..=q).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        bary[0] *= 0.5;
        bary[q] *= 0.5;

        ChebInterval { nodes, center, half, integral, bary, to_coeff }
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn contains(&self, t: f64) -> bool {
        let eps = 1e-12 * self.half.max(1.0);
        t >= self.nodes[0] - eps && t <= self.nodes[self.nodes.len() - 1] + eps
    }

    /// `out[i] = int_{center}^{nodes[i]} f`, from samples `f_j` at the nodes.
    pub fn integrate_from_center(&self, samples: &[f64]) -> Vec<f64> {
        let q1 = self.nodes.len();
        debug_assert_eq!(samples.len(), q1);
        (0..q1)
            .map(|i| (0..q1).map(|j| self.integral[(i, j)] * samples[j]).sum())
            .collect()
    }

    /// Complex version of [`Self::integrate_from_center`].
    pub fn integrate_from_center_c(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let q1 = self.nodes.len();
        debug_assert_eq!(samples.len(), q1);
        (0..q1)
            .map(|i| {
                let mut acc = Complex64::ZERO;
                for j in 0..q1 {
                    acc += self.integral[(i, j)] * samples[j];
                }
                acc
            })
            .collect()
    }

    /// Row `i` of the integration matrix (weights of each sample in the
    /// integral up to node `i`).
    pub fn integration_row(&self, i: usize) -> Vec<f64> {
        (0..self.nodes.len()).map(|j| self.integral[(i, j)]).collect()
    }

    /// Barycentric interpolation of nodal samples at an arbitrary `t`.
    pub fn interpolate(&self, samples: &[f64], t: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, &tj) in self.nodes.iter().enumerate() {
            let d = t - tj;
            if d.abs() < 1e-14 * self.half.max(1.0) {
                return samples[j];
            }
            let w = self.bary[j] / d;
            num += w * samples[j];
            den += w;
        }
        num / den
    }

    /// `int_{center}^{t} f` for arbitrary `t` in the interval.
    pub fn integral_to(&self, samples: &[f64], t: f64) -> f64 {
        let q1 = self.nodes.len();
        let x = (t - self.center) / self.half;
        // coefficients of f, antiderivative coefficients, Clenshaw at x and 0
        let mut a = vec![0.0; q1];
        for m in 0..q1 {
            for j in 0..q1 {
                a[m] += self.to_coeff[(m, j)] * samples[j];
            }
        }
        let mut b = vec![0.0; q1 + 1];
        b[1] = a[0] - if q1 > 2 { 0.5 * a[2] } else { 0.0 };
        for m in 2..=q1 - 1 + 1 {
            let next = if m + 1 <= q1 - 1 { a[m + 1] } else { 0.0 };
            b[m] = (a[m - 1] - next) / (2.0 * m as f64);
        }
        let eval = |x: f64| -> f64 { (0..b.len()).map(|m| b[m] * cheb_t(m, x)).sum() };
        self.half * (eval(x) - eval(0.0))
    }
}

fn cheb_t(m: usize, x: f64) -> f64 {
    // numerically stable on [-1, 1]
    (m as f64 * x.clamp(-1.0, 1.0).acos()).cos()
}
