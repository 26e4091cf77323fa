//! Dispersion relation of a homogeneous half-chain and the branch
//! `θ(ω)` of its inverse.
//!
//! `θ` solves `ν²(2 − 2 cos θ) + κ² = ω²` with `Im θ > 0` off the
//! spectrum. Writing `z = e^{iθ}`, the two roots of
//! `z² − b z + 1 = 0`, `b = 2 + (κ² − ω²)/ν²`, multiply to one, and the
//! branch picks the root inside the unit circle. On the cut
//! `κ ≤ |ω| ≤ a` both roots have modulus one and the limit from above
//! satisfies `sign(sin θ) = sign(ω)`.

use crate::chain::Bulk;
use crate::error::NumericError;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Distance of `|z|` from one below which an interior evaluation is
/// treated as lying on the cut.
pub const CUT_TOLERANCE: f64 = 1e-13;

/// Where `ω` is evaluated: off the real axis, or as a limit onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Approach {
    Interior(Complex64),
    /// `ω + i0`.
    Above(f64),
    /// `ω − i0`.
    Below(f64),
}

impl Approach {
    pub fn omega(&self) -> Complex64 {
        match *self {
            Approach::Interior(w) => w,
            Approach::Above(w) | Approach::Below(w) => Complex64::new(w, 0.0),
        }
    }

    /// The approach to `ω̄`.
    pub fn conj(&self) -> Approach {
        match *self {
            Approach::Interior(w) => Approach::Interior(w.conj()),
            Approach::Above(w) => Approach::Below(w),
            Approach::Below(w) => Approach::Above(w),
        }
    }
}

/// `θ` together with `z = e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub theta: Complex64,
    pub z: Complex64,
}

impl Branch {
    fn from_z(z: Complex64) -> Self {
        // atan2 returns -π for a negative real z with im = -0.0.
        let mut re = z.im.atan2(z.re);
        if re <= -PI {
            re = PI;
        }
        Self { theta: Complex64::new(re, -z.norm().ln()), z }
    }
}

/// `φ(θ) = sqrt(ν²(2 − 2 cos θ) + κ²)` for real `θ`.
pub fn phi(bulk: &Bulk, theta: f64) -> f64 {
    (bulk.nu_sq() * (2.0 - 2.0 * theta.cos()) + bulk.kappa_sq()).sqrt()
}

/// `b − 2 = (κ² − ω²)/ν²`. Kept separate so that `b² − 4 = (b − 2)(b + 2)`
/// does not cancel near `ω = ±κ`.
fn b_shift(bulk: &Bulk, omega: Complex64) -> Complex64 {
    (bulk.kappa_sq() - omega * omega) / bulk.nu_sq()
}

/// Evaluates the branch of `θ` for one half-chain.
pub fn theta(bulk: &Bulk, at: Approach) -> Result<Branch, NumericError> {
    match at {
        Approach::Interior(omega) => {
            let shift = b_shift(bulk, omega);
            let b = 2.0 + shift;
            let disc = (shift * (b + 2.0)).sqrt();
            let (p, m) = (b + disc, b - disc);
            let big = if p.norm() >= m.norm() { p } else { m };
            let z = 2.0 / big;
            if (1.0 - z.norm()).abs() < CUT_TOLERANCE {
                return Err(NumericError::OnCut { re: omega.re, im: omega.im });
            }
            Ok(Branch::from_z(z))
        }
        Approach::Above(omega) | Approach::Below(omega) => {
            let shift = b_shift(bulk, Complex64::new(omega, 0.0)).re;
            let b = 2.0 + shift;
            if shift >= 0.0 || shift <= -4.0 {
                let disc = (shift * (b + 2.0)).sqrt();
                let big = b + b.signum() * disc;
                let z = if disc == 0.0 { 0.5 * b } else { 2.0 / big };
                Ok(Branch::from_z(Complex64::new(z, 0.0)))
            } else {
                let mut sign = if omega >= 0.0 { 1.0 } else { -1.0 };
                if matches!(at, Approach::Below(_)) {
                    sign = -sign;
                }
                let im = sign * (-shift * (b + 2.0)).sqrt();
                Ok(Branch::from_z(Complex64::new(0.5 * b, 0.5 * im)))
            }
        }
    }
}

/// `dz/dω` along the branch, from `z + 1/z = b(ω)`.
pub fn dz_domega(bulk: &Bulk, omega: Complex64, z: Complex64) -> Complex64 {
    -2.0 * omega * z * z / (bulk.nu_sq() * (z * z - 1.0))
}

/// Branch points of `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// `ω = ±κ`, local variable `s = sqrt(ω² − κ²)` with `Im s > 0`.
    Kappa,
    /// `ω = ±a`, local variable `w = sqrt(a² − ω²)` with `Im w < 0`.
    A,
    /// `ω = 0` for an unpinned chain, local variable `ω` itself.
    Zero,
}

/// Local expansion of `z = e^{iθ}` near an edge, through cubic order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSeries {
    pub edge: Edge,
    pub coefficients: [Complex64; 4],
    kappa_sq: f64,
    a_sq: f64,
}

impl EdgeSeries {
    /// The local variable at `ω`, on the branch that matches `θ`
    /// off the real axis.
    pub fn local_variable(&self, omega: Complex64) -> Complex64 {
        let flip_up = |s: Complex64| if s.im < 0.0 { -s } else { s };
        match self.edge {
            Edge::Kappa => flip_up((omega * omega - self.kappa_sq).sqrt()),
            Edge::Zero => flip_up(omega),
            Edge::A => -flip_up((self.a_sq - omega * omega).sqrt()),
        }
    }

    /// Partial sum with the first `terms` coefficients.
    pub fn evaluate(&self, omega: Complex64, terms: usize) -> Complex64 {
        let s = self.local_variable(omega);
        self.coefficients[..terms.min(4)].iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
    }
}

pub fn edge_series(bulk: &Bulk, edge: Edge) -> Result<EdgeSeries, NumericError> {
    if edge == Edge::Zero && bulk.pinning != 0.0 {
        return Err(NumericError::Config(crate::error::ConfigError::Invalid(
            "the zero-frequency expansion needs an unpinned bulk".into(),
        )));
    }
    let nu = bulk.nu();
    let i = Complex64::i();
    let lead = if edge == Edge::A { -1.0 } else { 1.0 };
    let coefficients = [
        Complex64::new(lead, 0.0),
        i / nu,
        Complex64::new(-lead / (2.0 * nu * nu), 0.0),
        -i / (8.0 * nu * nu * nu),
    ];
    Ok(EdgeSeries { edge, coefficients, kappa_sq: bulk.kappa_sq(), a_sq: bulk.a() * bulk.a() })
}
