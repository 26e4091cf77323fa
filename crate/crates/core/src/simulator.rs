//! Time integration of the chain on a finite window with fixed walls, the
//! split `u = z + r` into exterior half-line solutions and a defect
//! response, and the defect response rebuilt from the kernel `N(t)`.
//!
//! The default integrator is the two-stage Gauss–Legendre method. For a
//! linear system its step is the (2,2) Padé approximant of `e^{hL}`, which
//! factors into two Cayley maps `(I − cL)^{−1}(I + cL)` with
//! `c = h/(3 ± i√3)`. Each factor preserves the energy exactly, so the
//! energy drift is rounding only. Velocity Verlet is kept for order checks.

use crate::chain::{energy, weighted_norm, BulkSide, Chain, LatticeState};
use crate::error::{ConfigError, NumericError};
use crate::propagator::green::GreenTable;
use crate::propagator::kernel::KernelSeries;
use num_complex::Complex64;
use rayon::prelude::*;

/// Sites added beyond the reach of the fastest wave on each side.
pub const WINDOW_MARGIN: i64 = 16;
/// Edge amplitude, relative to the peak, above which a run is flagged as
/// having reached its walls. The implicit integrator spreads rounding-level
/// values over the whole window at once, so exact zeros cannot be used.
pub const EDGE_TOLERANCE: f64 = 1e-10;
/// Default step as a fraction of `1/ω_max`.
pub const DT_FACTOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Fourth order, energy conserving.
    #[default]
    Gauss4,
    /// Second order, symplectic.
    Verlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub horizon: f64,
    /// Step; `DT_FACTOR / ω_max` when absent.
    pub dt: Option<f64>,
    pub integrator: Integrator,
    /// Exponent of the decaying norm `‖Y‖_{−α}` recorded along the run.
    pub alpha: f64,
    /// Record every `stride`-th step.
    pub stride: usize,
    /// Sites beyond the support on each side; sized from the horizon when
    /// absent.
    pub reach: Option<i64>,
    /// Times at which full snapshots are kept, rounded to the record grid.
    pub snapshots: Vec<f64>,
}

impl SimOptions {
    pub fn new(horizon: f64) -> Self {
        Self { horizon, dt: None, integrator: Integrator::Gauss4, alpha: 2.0, stride: 1, reach: None, snapshots: vec![] }
    }
}

/// Recorded run. Block series cover sites `−1..=N+1`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub chain: Chain,
    pub dt: f64,
    pub window: (i64, i64),
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub norm: Vec<f64>,
    pub alpha: f64,
    /// `u(n, t)` for `n = −1..=N+1`, indexed `[time][n + 1]`.
    pub block_u: Vec<Vec<f64>>,
    pub block_v: Vec<Vec<f64>>,
    pub snapshots: Vec<(f64, LatticeState)>,
    /// Time up to which no wave reflected at a wall has reached the
    /// initial support.
    pub valid_horizon: f64,
    pub warnings: Vec<String>,
}

impl Trajectory {
    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        let dev = self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
        if e0 > 0.0 {
            dev / e0
        } else {
            dev
        }
    }

    /// `u(site, t)` over the grid for a block site `−1..=N+1`.
    pub fn block_series(&self, site: i64) -> Vec<f64> {
        let i = (site + 1) as usize;
        self.block_u.iter().map(|row| row[i]).collect()
    }

    pub fn snapshot(&self, t: f64) -> Option<&LatticeState> {
        self.snapshots.iter().find(|(s, _)| (s - t).abs() <= 0.5 * self.dt).map(|(_, y)| y)
    }
}

/// Stiffness `K` of a window with walls: symmetric tridiagonal with the
/// bonds to the outer neighbours kept on the diagonal.
struct Stiffness {
    diag: Vec<f64>,
    off: Vec<f64>,
    mass: Vec<f64>,
}

impl Stiffness {
    fn new(chain: &Chain, lo: i64, hi: i64) -> Self {
        let diag = (lo..=hi).map(|s| chain.pinning(s) + chain.coupling(s - 1) + chain.coupling(s)).collect();
        let off = (lo..hi).map(|s| -chain.coupling(s)).collect();
        let mass = (lo..=hi).map(|s| chain.mass(s)).collect();
        Self { diag, off, mass }
    }

    fn apply<T>(&self, u: &[T], out: &mut [T])
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let n = u.len();
        for i in 0..n {
            let mut acc = u[i] * self.diag[i];
            if i > 0 {
                acc = acc + u[i - 1] * self.off[i - 1];
            }
            if i + 1 < n {
                acc = acc + u[i + 1] * self.off[i];
            }
            out[i] = acc;
        }
    }
}

/// One Cayley factor with its factored tridiagonal `M + c²K`.
struct Cayley {
    c: Complex64,
    lower: Vec<Complex64>,
    pivot: Vec<Complex64>,
    off: Vec<Complex64>,
}

impl Cayley {
    fn new(k: &Stiffness, c: Complex64) -> Self {
        let n = k.diag.len();
        let c2 = c * c;
        let off: Vec<Complex64> = k.off.iter().map(|g| c2 * g).collect();
        let mut pivot = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let d = k.mass[i] + c2 * k.diag[i];
            if i == 0 {
                pivot.push(d);
            } else {
                let l = off[i - 1] / pivot[i - 1];
                lower.push(l);
                pivot.push(d - l * off[i - 1]);
            }
        }
        Self { c, lower, pivot, off }
    }

    fn step(&self, k: &Stiffness, u: &mut [Complex64], v: &mut [Complex64], ku: &mut [Complex64]) {
        let n = u.len();
        let c = self.c;
        k.apply(u, ku);
        for i in 0..n {
            u[i] += c * v[i] / k.mass[i];
            v[i] -= c * ku[i];
        }
        // Right-hand side M u' + c v', then forward and back substitution.
        let rhs = ku;
        for i in 0..n {
            rhs[i] = k.mass[i] * u[i] + c * v[i];
        }
        for i in 1..n {
            let l = self.lower[i - 1];
            rhs[i] -= l * rhs[i - 1];
        }
        u[n - 1] = rhs[n - 1] / self.pivot[n - 1];
        for i in (0..n - 1).rev() {
            u[i] = (rhs[i] - self.off[i] * u[i + 1]) / self.pivot[i];
        }
        k.apply(u, rhs);
        for i in 0..n {
            v[i] -= c * rhs[i];
        }
    }
}

enum Stepper {
    Gauss4 { factors: [Cayley; 2], u: Vec<Complex64>, v: Vec<Complex64>, scratch: Vec<Complex64> },
    Verlet { h: f64, scratch: Vec<f64> },
}

impl Stepper {
    fn new(kind: Integrator, k: &Stiffness, h: f64) -> Self {
        let n = k.diag.len();
        match kind {
            Integrator::Gauss4 => {
                let s3 = 3f64.sqrt();
                let factors = [Cayley::new(k, h / Complex64::new(3.0, s3)), Cayley::new(k, h / Complex64::new(3.0, -s3))];
                let z = vec![Complex64::new(0.0, 0.0); n];
                Stepper::Gauss4 { factors, u: z.clone(), v: z.clone(), scratch: z }
            }
            Integrator::Verlet => Stepper::Verlet { h, scratch: vec![0.0; n] },
        }
    }

    fn step(&mut self, k: &Stiffness, u: &mut [f64], v: &mut [f64]) {
        match self {
            Stepper::Gauss4 { factors, u: cu, v: cv, scratch } => {
                for i in 0..u.len() {
                    cu[i] = Complex64::new(u[i], 0.0);
                    cv[i] = Complex64::new(v[i], 0.0);
                }
                for f in factors.iter() {
                    f.step(k, cu, cv, scratch);
                }
                for i in 0..u.len() {
                    u[i] = cu[i].re;
                    v[i] = cv[i].re;
                }
            }
            Stepper::Verlet { h, scratch } => {
                let h = *h;
                k.apply(u, scratch);
                for i in 0..u.len() {
                    v[i] -= 0.5 * h * scratch[i];
                    u[i] += h * v[i] / k.mass[i];
                }
                k.apply(u, scratch);
                for i in 0..u.len() {
                    v[i] -= 0.5 * h * scratch[i];
                }
            }
        }
    }
}

fn invalid(msg: impl Into<String>) -> NumericError {
    ConfigError::Invalid(msg.into()).into()
}

/// Integrates the chain from `y0` with walls far enough out that nothing
/// reflected reaches the initial support before the horizon.
fn edge_ratio(st: &LatticeState) -> f64 {
    let last = st.u.len() - 1;
    let edge = [st.u[0], st.v[0], st.u[last], st.v[last]].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let peak = st.u.iter().chain(&st.v).fold(0.0_f64, |m, x| m.max(x.abs()));
    if peak > 0.0 { edge / peak } else { 0.0 }
}

pub fn evolve(chain: &Chain, y0: &LatticeState, opts: &SimOptions) -> Result<Trajectory, NumericError> {
    if !(opts.horizon.is_finite() && opts.horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    if opts.stride == 0 {
        return Err(invalid("stride must be at least 1"));
    }
    let omega_max = chain.omega_max_local();
    let dt = opts.dt.unwrap_or(DT_FACTOR / omega_max);
    if !(dt > 0.0 && dt < 2.0 / omega_max) {
        return Err(invalid(format!("dt = {dt} violates the stability bound dt < 2/omega_max = {}", 2.0 / omega_max)));
    }
    let n = chain.n() as i64;
    let (s_lo, s_hi) = y0.support().map_or((0, n), |(a, b)| (a.min(0), b.max(n)));
    let v_max = chain.max_group_velocity();
    // The front spreads like t^{1/3} ahead of the fastest group velocity,
    // and its tail falls to the edge tolerance within about twelve widths.
    let front = (v_max * opts.horizon).ceil() + (12.0 * (v_max * opts.horizon).cbrt()).ceil();
    let reach = opts.reach.unwrap_or(front as i64 + WINDOW_MARGIN);
    if reach < 1 {
        return Err(invalid("reach must be at least one site"));
    }
    let (lo, hi) = (s_lo - reach, s_hi + reach);
    let valid_horizon = reach as f64 / v_max;
    let mut warnings = Vec::new();
    if opts.horizon > valid_horizon {
        warnings.push(format!("horizon {} exceeds the valid horizon {valid_horizon}", opts.horizon));
    }

    let mut state = y0.embedded(lo.min(y0.lo), hi.max(y0.hi()));
    if state.lo != lo || state.hi() != hi {
        return Err(invalid("initial data extends beyond the simulation window"));
    }
    let k = Stiffness::new(chain, lo, hi);
    let mut stepper = Stepper::new(opts.integrator, &k, dt);
    let steps = (opts.horizon / dt).round() as usize;

    let mut snap_steps: Vec<usize> = opts
        .snapshots
        .iter()
        .map(|t| ((t / dt).round() as usize / opts.stride) * opts.stride)
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let mut traj = Trajectory {
        chain: chain.clone(),
        dt,
        window: (lo, hi),
        times: vec![],
        energy: vec![],
        norm: vec![],
        alpha: opts.alpha,
        block_u: vec![],
        block_v: vec![],
        snapshots: vec![],
        valid_horizon,
        warnings,
    };
    let record = |step: usize, st: &LatticeState, traj: &mut Trajectory| {
        let t = step as f64 * dt;
        let e = energy(chain, st);
        traj.times.push(t);
        traj.energy.push(e.value);
        traj.norm.push(weighted_norm(st, -opts.alpha));
        traj.block_u.push((-1..=n + 1).map(|s| st.u_at(s)).collect());
        traj.block_v.push((-1..=n + 1).map(|s| st.v_at(s)).collect());
        if snap_steps.binary_search(&step).is_ok() {
            traj.snapshots.push((t, st.clone()));
        }
        if e.touches_edge && edge_ratio(st) > EDGE_TOLERANCE && !traj.warnings.iter().any(|w| w.starts_with("state reached")) {
            traj.warnings.push(format!("state reached the window edge at t = {t}"));
        }
    };
    record(0, &state, &mut traj);
    for step in 1..=steps {
        stepper.step(&k, &mut state.u, &mut state.v);
        if step % opts.stride == 0 {
            record(step, &state, &mut traj);
        }
    }
    Ok(traj)
}

/// Half-line solution `z` driven by the initial data beyond the block on
/// one side, at the sites `sites` (all on that side).
pub fn halfline_field(
    chain: &Chain,
    y0: &LatticeState,
    side: BulkSide,
    sites: &[i64],
    t: f64,
) -> Result<Vec<(f64, f64)>, NumericError> {
    let n = chain.n() as i64;
    let bulk = chain.bulk(side);
    // Local coordinate: distance from the wall at 0 (left) or at N (right).
    let local = |s: i64| match side {
        BulkSide::Minus => s,
        BulkSide::Plus => s - n,
    };
    let data: Vec<(i64, f64, f64)> = y0
        .sites()
        .filter(|&s| match side {
            BulkSide::Minus => s <= -1,
            BulkSide::Plus => s > n,
        })
        .map(|s| (local(s), y0.u_at(s), y0.v_at(s)))
        .filter(|(_, u, v)| *u != 0.0 || *v != 0.0)
        .collect();
    let reach = data.iter().map(|d| d.0.abs()).max().unwrap_or(0) + sites.iter().map(|s| local(*s).abs()).max().unwrap_or(0);
    let table = GreenTable::new(bulk, t, reach as usize)?;
    Ok(sites
        .iter()
        .map(|&s| {
            let ns = local(s);
            data.iter().fold((0.0, 0.0), |acc, &(k, u, v)| {
                let (du, dv) = table.halfline(ns, k).apply(u, v);
                (acc.0 + du, acc.1 + dv)
            })
        })
        .collect())
}

/// `u = z + r` on the block neighbourhood `−1..=N+1`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub times: Vec<f64>,
    /// `z(−1, t)` and its momentum.
    pub z_minus: Vec<(f64, f64)>,
    /// `z(N+1, t)` and its momentum.
    pub z_plus: Vec<(f64, f64)>,
    /// `r(n, t)` for `n = −1..=N+1`, indexed `[time][n + 1]`.
    pub r: Vec<Vec<f64>>,
    /// `m_n ṙ(n, t)` on the same sites.
    pub r_momentum: Vec<Vec<f64>>,
}

impl Decomposition {
    /// Forcing of the block: `γ_− z(−1, t)` on row 0 and `γ_+ z(N+1, t)` on
    /// row N.
    pub fn forcing(&self, chain: &Chain) -> Vec<Vec<f64>> {
        let n = chain.n();
        self.z_minus
            .iter()
            .zip(&self.z_plus)
            .map(|(zm, zp)| {
                let mut f = vec![0.0; n + 1];
                f[0] += chain.bulk_minus.coupling * zm.0;
                f[n] += chain.bulk_plus.coupling * zp.0;
                f
            })
            .collect()
    }

    pub fn r_series(&self, site: i64) -> Vec<f64> {
        self.r.iter().map(|row| row[(site + 1) as usize]).collect()
    }
}

/// Splits a recorded trajectory into the exterior solutions `z` and the
/// remainder `r = u − z`. `z` vanishes on the block by construction.
pub fn decompose(traj: &Trajectory, y0: &LatticeState) -> Result<Decomposition, NumericError> {
    let chain = &traj.chain;
    let n = chain.n() as i64;
    let zs: Vec<((f64, f64), (f64, f64))> = traj
        .times
        .par_iter()
        .map(|&t| {
            let zm = halfline_field(chain, y0, BulkSide::Minus, &[-1], t)?[0];
            let zp = halfline_field(chain, y0, BulkSide::Plus, &[n + 1], t)?[0];
            Ok((zm, zp))
        })
        .collect::<Result<_, NumericError>>()?;
    let width = (n + 3) as usize;
    let (mut r, mut r_momentum) = (Vec::new(), Vec::new());
    for (ti, (zm, zp)) in zs.iter().enumerate() {
        let mut row = traj.block_u[ti].clone();
        let mut mom = traj.block_v[ti].clone();
        row[0] -= zm.0;
        mom[0] -= zm.1;
        row[width - 1] -= zp.0;
        mom[width - 1] -= zp.1;
        r.push(row);
        r_momentum.push(mom);
    }
    Ok(Decomposition {
        times: traj.times.clone(),
        z_minus: zs.iter().map(|z| z.0).collect(),
        z_plus: zs.iter().map(|z| z.1).collect(),
        r,
        r_momentum,
    })
}

/// Largest residual of the block equations for `r`, with the forcing by
/// `z`, where `ṙ` comes from the recorded momenta and `r̈` from a sixth
/// order central difference of `ṙ`.
pub fn block_residual(chain: &Chain, dec: &Decomposition) -> f64 {
    let n = chain.n();
    let h = dec.times[1] - dec.times[0];
    let forcing = dec.forcing(chain);
    let stencil = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    let mut worst: f64 = 0.0;
    for ti in 3..dec.times.len().saturating_sub(3) {
        for row in 0..=n {
            let site = row as i64;
            let idx = row + 1;
            let rdd: f64 = stencil
                .iter()
                .enumerate()
                .map(|(j, c)| c * dec.r_momentum[ti + j - 3][idx] / chain.mass(site))
                .sum::<f64>()
                / (60.0 * h);
            let r = &dec.r[ti];
            let rhs = chain.coupling(site - 1) * (r[idx - 1] - r[idx]) + chain.coupling(site) * (r[idx + 1] - r[idx])
                - chain.pinning(site) * r[idx]
                + forcing[ti][row];
            worst = worst.max((chain.mass(site) * rdd - rhs).abs());
        }
    }
    worst
}

/// Weights of the composite Simpson rule on `count` equally spaced points,
/// closing with the three-eighths rule when the interval count is odd.
pub fn simpson_weights(count: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; count];
    if count < 2 {
        return w;
    }
    if count == 2 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let intervals = count - 1;
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if simpson_end < intervals {
        let s = simpson_end;
        for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + j] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// `r(t) = Ṅ(t) u₁ + N(t) v₀ + ∫₀ᵗ N(t − τ) F(τ) dτ` on the block, with
/// `u₁ = (m_n u₀(n))` and `v₀` the initial block momenta. The kernel must
/// carry orders 0 and 1 on the same grid as the forcing.
pub fn defect_response(
    chain: &Chain,
    y0: &LatticeState,
    kernel: &KernelSeries,
    forcing: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, NumericError> {
    let size = chain.n() + 1;
    let times = &kernel.times;
    if forcing.len() != times.len() || forcing.iter().any(|f| f.len() != size) || kernel.size != size {
        return Err(invalid("kernel and forcing grids do not match"));
    }
    let h = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) || times[0] != 0.0 {
        return Err(invalid("defect response needs a uniform grid starting at zero"));
    }
    let u1: Vec<f64> = (0..size).map(|k| chain.mass(k as i64) * y0.u_at(k as i64)).collect();
    let v0: Vec<f64> = (0..size).map(|k| y0.v_at(k as i64)).collect();
    let out = (0..times.len())
        .into_par_iter()
        .map(|ti| {
            let w = simpson_weights(ti + 1, h);
            (0..size)
                .map(|nn| {
                    let mut r = 0.0;
                    for k in 0..size {
                        r += kernel.get(1, ti, nn, k) * u1[k] + kernel.get(0, ti, nn, k) * v0[k];
                        for (j, wj) in w.iter().enumerate() {
                            let f = forcing[j][k];
                            if f != 0.0 {
                                r += wj * kernel.get(0, ti - j, nn, k) * f;
                            }
                        }
                    }
                    r
                })
                .collect()
        })
        .collect();
    Ok(out)
}
