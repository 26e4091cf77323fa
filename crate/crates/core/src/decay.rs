//! Decay rates of oscillating series and non-decaying resonance witnesses.

use crate::chain::{BulkSide, Chain, LatticeState};
use crate::classifier::{ResonanceKind, Verdict};
use crate::dispersion::{theta, Approach};
use crate::error::{ConfigError, NumericError};
use crate::jacobi::{assemble_frame, FrameMode};
use crate::propagator::kernel::zero_mode_limit;
use crate::simulator::{evolve, SimOptions, Trajectory};
use std::f64::consts::PI;

/// Fewest envelope points a fit accepts.
pub const MIN_FIT_POINTS: usize = 8;

/// How the envelope of `|series|` is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// Largest `|x|` in consecutive bins of this width.
    BinMaxima(f64),
    /// Every sample, for series without oscillation.
    Pointwise,
}

impl std::fmt::Display for Envelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Envelope::BinMaxima(w) => write!(f, "bin-maxima(width={w})"),
            Envelope::Pointwise => write!(f, "pointwise"),
        }
    }
}

/// Least-squares fit `log |x| ≈ p log t + c` on envelope points.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub window: (f64, f64),
    pub method: Envelope,
    /// `(log t, log envelope)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

impl DecayFit {
    pub fn report(&self) -> String {
        format!(
            "slope: {:.6}\nintercept: {:.6}\nresidual: {:.3e}\nwindow: {} {}\nmethod: {}\npoints: {}\n",
            self.slope,
            self.intercept,
            self.residual,
            self.window.0,
            self.window.1,
            self.method,
            self.points.len()
        )
    }
}

/// Bin width for series that oscillate at frequencies up to `a`.
pub fn default_bin_width(chain: &Chain) -> f64 {
    PI / chain.bulk_minus.a().max(chain.bulk_plus.a())
}

pub fn fit_decay(times: &[f64], values: &[f64], window: (f64, f64), method: Envelope) -> Result<DecayFit, NumericError> {
    if times.len() != values.len() {
        return Err(ConfigError::Invalid("times and values differ in length".into()).into());
    }
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 > t0) {
        return Err(ConfigError::Invalid(format!("fit window [{t0}, {t1}] must be positive and nonempty")).into());
    }
    let inside = times.iter().zip(values).filter(|(t, _)| **t >= t0 && **t <= t1).map(|(t, x)| (*t, x.abs()));
    let mut env: Vec<(f64, f64)> = Vec::new();
    match method {
        Envelope::Pointwise => env.extend(inside),
        Envelope::BinMaxima(width) => {
            if !(width > 0.0) {
                return Err(ConfigError::Invalid("bin width must be positive".into()).into());
            }
            let mut current: Option<(usize, f64, f64)> = None;
            for (t, x) in inside {
                let bin = ((t - t0) / width) as usize;
                match current {
                    Some((b, _, best)) if b == bin => {
                        if x > best {
                            current = Some((b, t, x));
                        }
                    }
                    _ => {
                        if let Some((_, bt, bx)) = current {
                            env.push((bt, bx));
                        }
                        current = Some((bin, t, x));
                    }
                }
            }
            if let Some((_, bt, bx)) = current {
                env.push((bt, bx));
            }
        }
    }
    let points: Vec<(f64, f64)> = env.into_iter().filter(|(_, x)| *x > 0.0).map(|(t, x)| (t.ln(), x.ln())).collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(NumericError::TooFewPoints { found: points.len(), needed: MIN_FIT_POINTS });
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    Ok(DecayFit { slope, intercept, residual, window, method, points })
}

/// What a resonance witness is expected to do.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// `u(0, t)` tends to this value.
    Limit(f64),
    /// `u(n, t) = v(n) sin(ω* t)` exactly.
    Standing { omega_star: f64 },
}

#[derive(Debug, Clone)]
pub struct ResonanceWitness {
    pub kind: ResonanceKind,
    pub initial: LatticeState,
    pub prediction: Prediction,
    /// Spatial profile `v(n)` of a standing wave, stored in `u`.
    pub profile: Option<LatticeState>,
    /// Equation residual of the standing wave relative to `‖v‖`.
    pub residual: Option<f64>,
    /// `u(0, T)` for a zero mode, `‖Y(T)‖_{−α}` for a standing wave.
    pub observed: f64,
    /// `|observed − limit| / |limit|` for a zero mode.
    pub relative_error: Option<f64>,
    pub fit: DecayFit,
    pub trajectory: Trajectory,
}

impl ResonanceWitness {
    pub fn report(&self) -> String {
        let mut s = String::new();
        match self.kind {
            ResonanceKind::ZeroMode => s.push_str("kind: zero-mode\n"),
            ResonanceKind::RealZero { omega_star } => s.push_str(&format!("kind: real-zero\nomega_star: {omega_star:.16e}\n")),
        }
        match &self.prediction {
            Prediction::Limit(l) => s.push_str(&format!("predicted_limit: {l:.16e}\n")),
            Prediction::Standing { omega_star } => s.push_str(&format!("predicted: v(n) sin({omega_star:.16e} t)\n")),
        }
        if let Some(r) = self.residual {
            s.push_str(&format!("residual: {r:.3e}\n"));
        }
        s.push_str(&format!("observed: {:.16e}\n", self.observed));
        if let Some(e) = self.relative_error {
            s.push_str(&format!("relative_error: {e:.3e}\n"));
        }
        s.push_str(&format!("fit_slope: {:.6}\n", self.fit.slope));
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessOptions {
    pub horizon: f64,
    pub alpha: f64,
    /// Initial block momenta for a zero mode; `v₀(0) = 1` when empty.
    pub momenta: Vec<f64>,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self { horizon: 200.0, alpha: 2.0, momenta: vec![] }
    }
}

/// Profile of the standing wave at a real zero `ω*`: the null vector `ξ`
/// on the block continued by `z_−^{−n} ξ₀` to the left and `z_+^{n−N} ξ_N`
/// to the right, cut where it falls below `1e−18 · max|ξ|`.
pub fn standing_profile(chain: &Chain, omega_star: f64) -> Result<LatticeState, NumericError> {
    let frame = assemble_frame(chain, FrameMode::Analytic(Approach::Above(omega_star)))?;
    let size = frame.size();
    let mut xi = vec![1.0_f64; size];
    for n in 0..size.saturating_sub(1) {
        let back = if n > 0 { frame.couplings[n - 1] * xi[n - 1] } else { 0.0 };
        xi[n + 1] = (frame.diag[n].re * xi[n] - back) / frame.couplings[n];
    }
    let scale = xi.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    xi.iter_mut().for_each(|x| *x /= scale);
    let z_minus = theta(chain.bulk(BulkSide::Minus), Approach::Above(omega_star))?.z.re;
    let z_plus = theta(chain.bulk(BulkSide::Plus), Approach::Above(omega_star))?.z.re;
    let reach = |z: f64| ((1e-18f64).ln() / z.abs().ln()).ceil().max(1.0) as i64;
    let (lm, lp) = (reach(z_minus), reach(z_plus));
    let n = chain.n() as i64;
    let mut out = LatticeState::zeros(-lm, n + lp);
    for s in out.lo..=out.hi() {
        let value = if s < 0 {
            xi[0] * z_minus.powi((-s) as i32)
        } else if s > n {
            xi[size - 1] * z_plus.powi((s - n) as i32)
        } else {
            xi[s as usize]
        };
        out.set(s, value, 0.0);
    }
    Ok(out)
}

/// Largest `|(K v)(n) − ω² m_n v(n)|` over the profile rows, relative to
/// `‖v‖₂`.
pub fn standing_residual(chain: &Chain, profile: &LatticeState, omega: f64) -> f64 {
    let norm = profile.u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v = |s: i64| profile.u_at(s);
    profile
        .sites()
        .map(|s| {
            let kv = chain.pinning(s) * v(s) + chain.coupling(s - 1) * (v(s) - v(s - 1)) + chain.coupling(s) * (v(s) - v(s + 1));
            (kv - omega * omega * chain.mass(s) * v(s)).abs()
        })
        .fold(0.0, f64::max)
        / norm
}

/// Builds and checks a solution that does not decay.
pub fn resonance_witness(chain: &Chain, verdict: &Verdict, opts: &WitnessOptions) -> Result<ResonanceWitness, NumericError> {
    let Some(kind) = verdict.resonance() else {
        return Err(ConfigError::Invalid(format!("chain satisfies condition {}, no resonance to witness", verdict.kind())).into());
    };
    let n = chain.n() as i64;
    let window = (opts.horizon / 10.0, opts.horizon);
    match kind {
        ResonanceKind::ZeroMode => {
            let mut y0 = LatticeState::zeros(0, n);
            if opts.momenta.is_empty() {
                y0.set(0, 0.0, 1.0);
            } else if opts.momenta.len() != (n + 1) as usize {
                return Err(ConfigError::Invalid(format!("expected {} block momenta", n + 1)).into());
            } else {
                for (k, p) in opts.momenta.iter().enumerate() {
                    y0.set(k as i64, 0.0, *p);
                }
            }
            let limit = zero_mode_limit(chain) * y0.v.iter().sum::<f64>();
            let mut so = SimOptions::new(opts.horizon);
            so.alpha = opts.alpha;
            let traj = evolve(chain, &y0, &so)?;
            let u0 = traj.block_series(0);
            let observed = *u0.last().unwrap();
            let fit = fit_decay(&traj.times, &u0, window, Envelope::BinMaxima(default_bin_width(chain)))?;
            Ok(ResonanceWitness {
                kind,
                initial: y0,
                prediction: Prediction::Limit(limit),
                profile: None,
                residual: None,
                observed,
                relative_error: Some((observed - limit).abs() / limit.abs()),
                fit,
                trajectory: traj,
            })
        }
        ResonanceKind::RealZero { omega_star } => {
            let profile = standing_profile(chain, omega_star)?;
            let residual = standing_residual(chain, &profile, omega_star);
            let mut y0 = LatticeState::zeros(profile.lo, profile.hi());
            for s in profile.sites() {
                y0.set(s, 0.0, omega_star * chain.mass(s) * profile.u_at(s));
            }
            let mut so = SimOptions::new(opts.horizon);
            so.alpha = opts.alpha;
            let traj = evolve(chain, &y0, &so)?;
            let observed = *traj.norm.last().unwrap();
            let width = default_bin_width(chain).max(PI / omega_star);
            let fit = fit_decay(&traj.times, &traj.norm, window, Envelope::BinMaxima(width))?;
            Ok(ResonanceWitness {
                kind,
                initial: y0,
                prediction: Prediction::Standing { omega_star },
                profile: Some(profile),
                residual: Some(residual),
                observed,
                relative_error: None,
                fit,
                trajectory: traj,
            })
        }
    }
}
