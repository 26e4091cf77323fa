//! Green functions of the homogeneous chain and of its half-lines.
//!
//! `𝒢_t(n) = (1/2π) ∫ e^{−inθ} Ĝ_t(θ) dθ` with
//! `Ĝ_t = [[cos φt, sin φt/(mφ)], [−mφ sin φt, cos φt]]` maps initial
//! `(u, v)` at site `n − k` to `(u, v)` at time `t`. The integral is a
//! trapezoid sum on `M` equispaced nodes, which is a discrete Fourier
//! transform, so a whole table of sites comes from one FFT per entry.

use crate::chain::Bulk;
use crate::dispersion::phi;
use crate::error::NumericError;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// 2×2 block `[[G00, G01], [G10, G11]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GreenMatrix(pub [[f64; 2]; 2]);

impl GreenMatrix {
    pub const IDENTITY: GreenMatrix = GreenMatrix([[1.0, 0.0], [0.0, 1.0]]);

    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        let g = &self.0;
        (g[0][0] * u + g[0][1] * v, g[1][0] * u + g[1][1] * v)
    }

    pub fn max_abs_diff(&self, other: &GreenMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        d
    }
}

impl std::ops::Sub for GreenMatrix {
    type Output = GreenMatrix;
    fn sub(self, rhs: GreenMatrix) -> GreenMatrix {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

/// Trapezoid node count for horizon `t` and sites up to `n_max`: at least
/// `64 ⌈a t / π⌉`, rounded up to a power of two.
pub fn torus_nodes(bulk: &Bulk, t: f64, n_max: usize) -> usize {
    let by_time = 64 * (bulk.a() * t.abs() / PI).ceil() as usize;
    by_time.max(4 * n_max + 64).max(256).next_power_of_two()
}

/// `𝒢_t(n)` for `|n| ≤ n_max` at one time.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub t: f64,
    pub n_max: usize,
    entries: Vec<GreenMatrix>,
}

impl GreenTable {
    /// Builds the table and checks it against one with twice the nodes.
    pub fn new(bulk: &Bulk, t: f64, n_max: usize) -> Result<Self, NumericError> {
        let m = torus_nodes(bulk, t, n_max);
        let coarse = Self::with_nodes(bulk, t, n_max, m);
        let fine = Self::with_nodes(bulk, t, n_max, 2 * m);
        let tol = 1e-11 * (1.0 + t / bulk.mass + bulk.mass * bulk.a());
        let err = coarse.entries.iter().zip(&fine.entries).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
        if err > tol {
            return Err(NumericError::convergence("torus quadrature", format!("doubling changed entries by {err:e}")));
        }
        Ok(fine)
    }

    /// Table from exactly `m` trapezoid nodes, without the doubling check.
    pub fn with_nodes(bulk: &Bulk, t: f64, n_max: usize, m: usize) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(m);
        let mass = bulk.mass;
        let mut cols: [Vec<Complex64>; 3] = [vec![], vec![], vec![]];
        for j in 0..m {
            let th = 2.0 * PI * j as f64 / m as f64;
            let f = phi(bulk, th);
            let (s, c) = (f * t).sin_cos();
            let g01 = if f == 0.0 { t / mass } else { s / (mass * f) };
            cols[0].push(Complex64::new(c, 0.0));
            cols[1].push(Complex64::new(g01, 0.0));
            cols[2].push(Complex64::new(-mass * f * s, 0.0));
        }
        for col in cols.iter_mut() {
            fft.process(col);
        }
        let scale = 1.0 / m as f64;
        let entries = (0..=n_max)
            .map(|n| {
                let k = n % m;
                let g00 = cols[0][k].re * scale;
                GreenMatrix([[g00, cols[1][k].re * scale], [cols[2][k].re * scale, g00]])
            })
            .collect();
        Self { t, n_max, entries }
    }

    /// `𝒢_t(n)`; even in `n`.
    pub fn get(&self, n: i64) -> GreenMatrix {
        let k = n.unsigned_abs() as usize;
        assert!(k <= self.n_max, "site {n} outside the table");
        self.entries[k]
    }

    /// Image-method kernel `G_t(n, k) = 𝒢_t(n − k) − 𝒢_t(n + k)` of the
    /// half-line with a fixed zero at the origin.
    pub fn halfline(&self, n: i64, k: i64) -> GreenMatrix {
        self.get(n - k) - self.get(n + k)
    }
}

/// `𝒢_t(n)` for a single site.
pub fn free_green(bulk: &Bulk, n: i64, t: f64) -> Result<GreenMatrix, NumericError> {
    Ok(GreenTable::new(bulk, t, n.unsigned_abs() as usize)?.get(n))
}

/// Half-line kernel for sites of one sign, `n·k > 0`.
pub fn halfline_green(bulk: &Bulk, n: i64, k: i64, t: f64) -> Result<GreenMatrix, NumericError> {
    assert!(n * k > 0, "half-line sites must be nonzero and on the same side");
    let reach = (n.abs() + k.abs()) as usize;
    Ok(GreenTable::new(bulk, t, reach)?.halfline(n, k))
}
