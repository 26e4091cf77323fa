//! Boundary kernels `Γ_n(t)` and the defect kernel `N(t)` as integrals of
//! the jump of their transforms across the spectrum.
//!
//! With `Ñ(ω) = D̃(ω)^{−1}`,
//! `N(t) = (1/2π) ∫_Λ e^{−iωt} (Ñ(ω + i0) − Ñ(ω − i0)) dω`,
//! and derivatives carry the extra weight `(−iω)^j`. Each piece of `Λ`
//! between two band edges is split at its midpoint and mapped by
//! `ω = edge ± s²`, which turns the square-root behaviour at the edges into a
//! smooth integrand for composite Gauss–Legendre panels.
//!
//! Nodes come in mirrored pairs `±ω`. An unpinned chain with unpinned
//! defects has a pole of `Ñ(ω ± i0)` at zero whose jump is odd in `ω`; the
//! paired sum is then a principal value, which is exactly the contribution
//! the pole makes to the kernel.

use crate::chain::{Bulk, BulkSide, Chain};
use crate::classifier::{find_spectral_zero, spectral_gaps};
use crate::dispersion::{dz_domega, theta, Approach};
use crate::error::NumericError;
use crate::jacobi::{assemble_frame, invert_unchecked, negative_count, FrameMode};
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

const GL_ORDER: usize = 16;
/// Panels per half segment: `⌈PANEL_BASE + PANEL_PER_PHASE · h · t_max⌉`,
/// `h` the half length. One panel then spans at most about a full period of
/// `e^{−iωt}`.
const PANEL_BASE: f64 = 4.0;
const PANEL_PER_PHASE: f64 = 1.0 / PI;
const MAX_DOUBLINGS: u32 = 5;
const CONVERGENCE_TOL: f64 = 1e-9;
/// Largest rule the doubling loop may build before giving up.
const MAX_NODES: usize = 1 << 22;

fn gl_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(GL_ORDER.try_into().unwrap()).as_node_weight_pairs().to_vec()
    })
}

/// Positive nodes `ω_i` and weights `w_i` for `∫_{Λ ∩ (0,∞)} f(ω) dω`.
#[derive(Debug, Clone)]
pub struct CutRule {
    pub omega: Vec<f64>,
    pub weight: Vec<f64>,
}

impl CutRule {
    fn panels(h: f64, t_max: f64, doublings: u32) -> usize {
        ((PANEL_BASE + PANEL_PER_PHASE * h * t_max).ceil() as usize) << doublings
    }

    /// Node count of `new(segments, t_max, doublings)` without building it.
    pub fn size(segments: &[(f64, f64)], t_max: f64, doublings: u32) -> usize {
        segments.iter().map(|&(p, q)| 2 * GL_ORDER * Self::panels(0.5 * (q - p), t_max, doublings)).sum()
    }

    pub fn new(segments: &[(f64, f64)], t_max: f64, doublings: u32) -> Self {
        let (mut omega, mut weight) = (Vec::new(), Vec::new());
        for &(p, q) in segments {
            let h = 0.5 * (q - p);
            let panels = Self::panels(h, t_max, doublings);
            let s_len = h.sqrt();
            for (edge, dir) in [(p, 1.0), (q, -1.0)] {
                let ds = s_len / panels as f64;
                for k in 0..panels {
                    let s0 = k as f64 * ds;
                    for &(x, w) in gl_rule() {
                        let s = s0 + 0.5 * ds * (x + 1.0);
                        omega.push(edge + dir * s * s);
                        weight.push(2.0 * s * 0.5 * ds * w);
                    }
                }
            }
        }
        Self { omega, weight }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Pieces of `Λ ∩ (0, ∞)` between consecutive band edges of either bulk.
pub fn cut_segments(chain: &Chain) -> Vec<(f64, f64)> {
    let bands = [chain.bulk_minus.band(), chain.bulk_plus.band()];
    let mut points: Vec<f64> = bands.iter().flat_map(|b| [b.0, b.1]).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(p, q)| {
            let mid = 0.5 * (p + q);
            bands.iter().any(|b| mid > b.0 && mid < b.1)
        })
        .collect()
}

/// Time series of a matrix-valued kernel and some of its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeries {
    pub times: Vec<f64>,
    pub orders: Vec<u32>,
    /// Matrix dimension; 1 for scalar kernels.
    pub size: usize,
    /// Largest imaginary part met before taking real parts.
    pub max_imag: f64,
    /// Quadrature nodes on the positive half of the cut.
    pub nodes: usize,
    values: Vec<f64>,
}

impl KernelSeries {
    fn slot(&self, order: u32, ti: usize, n: usize, k: usize) -> usize {
        let oi = self.orders.iter().position(|o| *o == order).expect("order not computed");
        ((oi * self.times.len() + ti) * self.size + n) * self.size + k
    }

    pub fn get(&self, order: u32, ti: usize, n: usize, k: usize) -> f64 {
        self.values[self.slot(order, ti, n, k)]
    }

    /// Entry `(n, k)` of the order-`order` derivative over the whole grid.
    pub fn series(&self, order: u32, n: usize, k: usize) -> Vec<f64> {
        (0..self.times.len()).map(|ti| self.get(order, ti, n, k)).collect()
    }
}

fn validate_grid(times: &[f64]) -> Result<(), NumericError> {
    let ok = !times.is_empty()
        && times.iter().all(|t| t.is_finite() && *t >= 0.0)
        && times.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(crate::error::ConfigError::Invalid("time grid must be finite, nonnegative and increasing".into()).into())
    }
}

/// Jump values at `+ω` and `−ω` for every node.
struct Jumps {
    plus: Vec<Vec<Complex64>>,
    minus: Vec<Vec<Complex64>>,
}

fn jumps<F>(rule: &CutRule, jump: &F) -> Result<Jumps, NumericError>
where
    F: Fn(f64) -> Result<Vec<Complex64>, NumericError> + Sync,
{
    let plus = rule.omega.par_iter().map(|w| jump(*w)).collect::<Result<Vec<_>, _>>()?;
    let minus = rule.omega.par_iter().map(|w| jump(-*w)).collect::<Result<Vec<_>, _>>()?;
    Ok(Jumps { plus, minus })
}

/// `(1/2π) Σ_i w_i [J(ω_i) (−iω_i)^j e^{−iω_i t} + J(−ω_i) (iω_i)^j e^{iω_i t}]`,
/// arranged so that an odd jump cancels without loss near `ω = 0`.
fn sum_at(rule: &CutRule, jumps: &Jumps, entries: usize, t: f64, order: u32) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); entries];
    for (i, (&w, &wt)) in rule.omega.iter().zip(&rule.weight).enumerate() {
        let fp = Complex64::new(0.0, -w).powu(order);
        let fm = Complex64::new(0.0, w).powu(order);
        let (s, c) = (w * t).sin_cos();
        for e in 0..entries {
            let p = jumps.plus[i][e] * fp;
            let m = jumps.minus[i][e] * fm;
            let even = 0.5 * (p + m);
            let odd = 0.5 * (p - m);
            acc[e] += wt * (2.0 * c * even - Complex64::new(0.0, 2.0 * s) * odd);
        }
    }
    acc.iter().map(|a| a / (2.0 * PI)).collect()
}

fn probe_times(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let picks = 8.min(n);
    let mut out: Vec<f64> = (0..picks).map(|i| times[(i * (n - 1)) / (picks - 1).max(1)]).collect();
    out.dedup();
    out
}

/// Integrates the jump over the cut for every time and order, doubling the
/// panel count until the probe times agree.
fn integrate_cut<F>(
    segments: &[(f64, f64)],
    jump: F,
    entries: usize,
    times: &[f64],
    orders: &[u32],
) -> Result<(Vec<Complex64>, usize), NumericError>
where
    F: Fn(f64) -> Result<Vec<Complex64>, NumericError> + Sync,
{
    let t_max = *times.last().unwrap();
    let probes = probe_times(times);
    let needed = CutRule::size(segments, t_max, MAX_DOUBLINGS);
    if needed > MAX_NODES {
        return Err(NumericError::convergence(
            "cut quadrature",
            format!("t_max = {t_max} would need up to {needed} nodes, limit {MAX_NODES}"),
        ));
    }
    let mut coarse_rule = CutRule::new(segments, t_max, 0);
    let mut coarse = jumps(&coarse_rule, &jump)?;
    for level in 1..=MAX_DOUBLINGS {
        let fine_rule = CutRule::new(segments, t_max, level);
        let fine = jumps(&fine_rule, &jump)?;
        let mut worst: f64 = 0.0;
        for &t in &probes {
            for &o in orders {
                let a = sum_at(&coarse_rule, &coarse, entries, t, o);
                let b = sum_at(&fine_rule, &fine, entries, t, o);
                let scale = 1.0 + b.iter().map(|x| x.norm()).fold(0.0, f64::max);
                let d = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                worst = if (d / scale).is_finite() { worst.max(d / scale) } else { f64::INFINITY };
            }
        }
        if worst <= CONVERGENCE_TOL {
            let values: Vec<Complex64> = orders
                .iter()
                .flat_map(|&o| times.par_iter().map(move |&t| (o, t)).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .par_iter()
                .flat_map_iter(|&(o, t)| sum_at(&fine_rule, &fine, entries, t, o))
                .collect();
            return Ok((values, fine_rule.len()));
        }
        coarse_rule = fine_rule;
        coarse = fine;
        if level == MAX_DOUBLINGS {
            return Err(NumericError::convergence(
                "cut quadrature",
                format!("relative change {worst:e} after {MAX_DOUBLINGS} doublings"),
            ));
        }
    }
    unreachable!()
}

fn finish(values: Vec<Complex64>, times: &[f64], orders: &[u32], size: usize, nodes: usize) -> KernelSeries {
    let max_imag = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    KernelSeries {
        times: times.to_vec(),
        orders: orders.to_vec(),
        size,
        max_imag,
        nodes,
        values: values.iter().map(|v| v.re).collect(),
    }
}

/// `Γ_n(t)` for the half-chain `bulk`, `n ≠ 0`: the response at distance
/// `|n|` to a unit boundary impulse, transform `e^{iθ|n|}`.
pub fn gamma_kernel(bulk: &Bulk, n: i64, times: &[f64]) -> Result<KernelSeries, NumericError> {
    assert!(n != 0, "boundary kernels are defined off the wall");
    validate_grid(times)?;
    let power = n.unsigned_abs() as u32;
    let jump = |w: f64| -> Result<Vec<Complex64>, NumericError> {
        let up = theta(bulk, Approach::Above(w))?.z.powu(power);
        let down = theta(bulk, Approach::Below(w))?.z.powu(power);
        Ok(vec![up - down])
    };
    let (values, nodes) = integrate_cut(&[bulk.band()], jump, 1, times, &[0])?;
    Ok(finish(values, times, &[0], 1, nodes))
}

/// How `kernel_n` treats real zeros of `det D̃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolePolicy {
    /// Refuse chains with zeros in the real gaps.
    #[default]
    Refuse,
    /// Add the residues of the poles at `±ω*`.
    Include,
}

/// Real zeros of `det D̃` in the gaps, with multiplicity.
pub fn real_zeros(chain: &Chain) -> Vec<f64> {
    let mut out = Vec::new();
    if find_spectral_zero(chain).is_none() {
        return out;
    }
    let edges: Vec<f64> = [&chain.bulk_minus, &chain.bulk_plus].iter().flat_map(|b| [b.kappa(), b.a()]).collect();
    let count = |w: f64| {
        negative_count(&assemble_frame(chain, FrameMode::Analytic(Approach::Above(w))).expect("real gap point"))
    };
    for (lo, hi) in spectral_gaps(chain) {
        let nudge = |x: f64, dir: f64| if edges.contains(&x) { x + dir * 1e-13 * x.max(1.0) } else { x };
        let (l0, r0) = (nudge(lo, 1.0), nudge(hi, -1.0));
        if l0 >= r0 {
            continue;
        }
        let (c_lo, c_hi) = (count(l0), count(r0));
        for level in c_lo..c_hi {
            let (mut l, mut r) = (l0, r0);
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                if mid <= l || mid >= r {
                    break;
                }
                if count(mid) <= level {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            out.push(0.5 * (l + r));
        }
    }
    out
}

/// Residue `ξ ξᵀ / (ξᵀ D̃'(ω*) ξ)` of `Ñ` at a simple real zero `ω*`.
pub fn pole_residue(chain: &Chain, omega_star: f64) -> Result<Vec<f64>, NumericError> {
    let frame = assemble_frame(chain, FrameMode::Analytic(Approach::Above(omega_star)))?;
    let size = frame.size();
    let mut xi = vec![1.0_f64; size];
    for n in 0..size.saturating_sub(1) {
        let back = if n > 0 { frame.couplings[n - 1] * xi[n - 1] } else { 0.0 };
        xi[n + 1] = (frame.diag[n].re * xi[n] - back) / frame.couplings[n];
    }
    let mut deriv: Vec<f64> = chain.defects.iter().map(|d| -2.0 * d.mass * omega_star).collect();
    let w = Complex64::new(omega_star, 0.0);
    for (side, idx) in [(BulkSide::Minus, 0), (BulkSide::Plus, size - 1)] {
        let b = chain.bulk(side);
        let z = theta(b, Approach::Above(omega_star))?.z;
        deriv[idx] -= b.coupling * dz_domega(b, w, z).re;
    }
    let denom: f64 = xi.iter().zip(&deriv).map(|(x, d)| x * x * d).sum();
    Ok((0..size * size).map(|i| xi[i / size] * xi[i % size] / denom).collect())
}

/// `1/(sqrt(m_− γ_−) + sqrt(m_+ γ_+))`: every entry of `N(t)` tends to this
/// value when all pinnings vanish.
pub fn zero_mode_limit(chain: &Chain) -> f64 {
    let s = |b: &Bulk| (b.mass * b.coupling).sqrt();
    1.0 / (s(&chain.bulk_minus) + s(&chain.bulk_plus))
}

/// The defect kernel `N(t)` and requested derivatives on a time grid.
pub fn kernel_n(chain: &Chain, times: &[f64], orders: &[u32], poles: PolePolicy) -> Result<KernelSeries, NumericError> {
    validate_grid(times)?;
    if orders.is_empty() || orders.iter().any(|o| *o > 2) {
        return Err(crate::error::ConfigError::Invalid("derivative orders must be 0, 1 or 2".into()).into());
    }
    let zeros = real_zeros(chain);
    if !zeros.is_empty() && poles == PolePolicy::Refuse {
        return Err(NumericError::RealPoles { omega_star: zeros[0] });
    }
    let size = chain.n() + 1;
    let jump = |w: f64| -> Result<Vec<Complex64>, NumericError> {
        let up = invert_unchecked(&assemble_frame(chain, FrameMode::Analytic(Approach::Above(w)))?);
        let down = invert_unchecked(&assemble_frame(chain, FrameMode::Analytic(Approach::Below(w)))?);
        Ok(up.entries.iter().zip(&down.entries).map(|(a, b)| a - b).collect())
    };
    let (mut values, nodes) = integrate_cut(&cut_segments(chain), jump, size * size, times, orders)?;
    for &w in &zeros {
        let res = pole_residue(chain, w)?;
        // −i Σ_{p = ±ω*} (−ip)^j e^{−ipt} Res_p with Res_{−ω*} = −Res_{ω*}.
        for (oi, &o) in orders.iter().enumerate() {
            for (ti, &t) in times.iter().enumerate() {
                let p = Complex64::new(0.0, -w).powu(o) * Complex64::from_polar(1.0, -w * t);
                let m = Complex64::new(0.0, w).powu(o) * Complex64::from_polar(1.0, w * t);
                let factor = Complex64::new(0.0, -1.0) * (p - m);
                for (e, r) in res.iter().enumerate() {
                    values[(oi * times.len() + ti) * size * size + e] += factor * r;
                }
            }
        }
    }
    Ok(finish(values, times, orders, size, nodes))
}

/// Memo of defect kernels keyed by chain, grid, orders and pole policy.
#[derive(Debug, Default)]
pub struct KernelCache {
    map: Mutex<HashMap<u64, Arc<KernelSeries>>>,
}

fn cache_key(chain: &Chain, times: &[f64], orders: &[u32], poles: PolePolicy) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    let bulk = |b: &Bulk| [b.mass, b.coupling, b.pinning];
    for x in bulk(&chain.bulk_minus).iter().chain(&bulk(&chain.bulk_plus)) {
        x.to_bits().hash(&mut h);
    }
    for d in &chain.defects {
        (d.mass.to_bits(), d.pinning.to_bits()).hash(&mut h);
    }
    for g in &chain.couplings {
        g.to_bits().hash(&mut h);
    }
    for t in times {
        t.to_bits().hash(&mut h);
    }
    orders.hash(&mut h);
    (poles == PolePolicy::Include).hash(&mut h);
    h.finish()
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kernel_n(
        &self,
        chain: &Chain,
        times: &[f64],
        orders: &[u32],
        poles: PolePolicy,
    ) -> Result<Arc<KernelSeries>, NumericError> {
        let key = cache_key(chain, times, orders, poles);
        if let Some(k) = self.map.lock().unwrap().get(&key) {
            return Ok(k.clone());
        }
        let k = Arc::new(kernel_n(chain, times, orders, poles)?);
        self.map.lock().unwrap().insert(key, k.clone());
        Ok(k)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
