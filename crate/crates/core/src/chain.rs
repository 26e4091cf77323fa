//! Chain parameters, lattice states, energy and weighted norms.
//!
//! Sites `n < 0` carry the left bulk parameters, sites `n > N` the right
//! bulk ones, and `0..=N` form the defect block. Bond `n` joins sites `n`
//! and `n + 1`; bonds left of the block use the left bulk coupling and bonds
//! from `N` onwards use the right one.

use crate::error::ConfigError;
use serde::{Deserialize, Serialize};

/// Mass, coupling and pinning of a homogeneous half-chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bulk {
    pub mass: f64,
    pub coupling: f64,
    pub pinning: f64,
}

impl Bulk {
    pub fn new(mass: f64, coupling: f64, pinning: f64) -> Self {
        Self { mass, coupling, pinning }
    }

    /// `ν² = γ/m`.
    pub fn nu_sq(&self) -> f64 {
        self.coupling / self.mass
    }

    pub fn nu(&self) -> f64 {
        self.nu_sq().sqrt()
    }

    /// `κ² = μ/m`.
    pub fn kappa_sq(&self) -> f64 {
        self.pinning / self.mass
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_sq().sqrt()
    }

    /// Upper band edge `a = sqrt(κ² + 4ν²)`.
    pub fn a(&self) -> f64 {
        (self.kappa_sq() + 4.0 * self.nu_sq()).sqrt()
    }

    /// Positive half of the continuous spectrum, `[κ, a]`.
    pub fn band(&self) -> (f64, f64) {
        (self.kappa(), self.a())
    }

    /// Whether `|ω|` lies in the closed band.
    pub fn in_band(&self, omega: f64) -> bool {
        let w = omega.abs();
        w >= self.kappa() && w <= self.a()
    }

    fn validate(&self, which: &str) -> Result<(), ConfigError> {
        check_positive(&format!("{which}.mass"), self.mass)?;
        check_positive(&format!("{which}.coupling"), self.coupling)?;
        check_nonnegative(&format!("{which}.pinning"), self.pinning)
    }
}

/// One site of the defect block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectSite {
    pub mass: f64,
    pub pinning: f64,
}

/// Which half-chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BulkSide {
    Minus,
    Plus,
}

/// Infinite chain with a finite block of `N + 1` defect sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub bulk_minus: Bulk,
    pub bulk_plus: Bulk,
    pub defects: Vec<DefectSite>,
    /// Couplings `γ_0 … γ_{N-1}` inside the block.
    #[serde(default)]
    pub couplings: Vec<f64>,
}

impl Chain {
    /// Validates the parameters and builds the chain.
    pub fn new(
        bulk_minus: Bulk,
        bulk_plus: Bulk,
        defects: Vec<DefectSite>,
        couplings: Vec<f64>,
    ) -> Result<Self, ConfigError> {
        let chain = Self { bulk_minus, bulk_plus, defects, couplings };
        chain.validate()?;
        Ok(chain)
    }

    /// Single defect site between two bulks.
    pub fn single(bulk_minus: Bulk, bulk_plus: Bulk, mass: f64, pinning: f64) -> Result<Self, ConfigError> {
        Self::new(bulk_minus, bulk_plus, vec![DefectSite { mass, pinning }], Vec::new())
    }

    /// Both bulks equal to `bulk`.
    pub fn uniform(bulk: Bulk, defects: Vec<DefectSite>, couplings: Vec<f64>) -> Result<Self, ConfigError> {
        Self::new(bulk, bulk, defects, couplings)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.bulk_minus.validate("bulk_minus")?;
        self.bulk_plus.validate("bulk_plus")?;
        if self.defects.is_empty() {
            return Err(ConfigError::Invalid("at least one defect site is required".into()));
        }
        let n = self.defects.len() - 1;
        if self.couplings.len() != n {
            return Err(ConfigError::Invalid(format!(
                "{} defect sites need {} block couplings, got {}",
                n + 1,
                n,
                self.couplings.len()
            )));
        }
        for (i, d) in self.defects.iter().enumerate() {
            check_positive(&format!("defects[{i}].mass"), d.mass)?;
            check_nonnegative(&format!("defects[{i}].pinning"), d.pinning)?;
        }
        for (i, g) in self.couplings.iter().enumerate() {
            check_positive(&format!("couplings[{i}]"), *g)?;
        }
        Ok(())
    }

    /// Index `N` of the last defect site.
    pub fn n(&self) -> usize {
        self.defects.len() - 1
    }

    pub fn bulk(&self, side: BulkSide) -> &Bulk {
        match side {
            BulkSide::Minus => &self.bulk_minus,
            BulkSide::Plus => &self.bulk_plus,
        }
    }

    pub fn mass(&self, site: i64) -> f64 {
        match self.block_index(site) {
            Some(i) => self.defects[i].mass,
            None if site < 0 => self.bulk_minus.mass,
            None => self.bulk_plus.mass,
        }
    }

    pub fn pinning(&self, site: i64) -> f64 {
        match self.block_index(site) {
            Some(i) => self.defects[i].pinning,
            None if site < 0 => self.bulk_minus.pinning,
            None => self.bulk_plus.pinning,
        }
    }

    /// Coupling of the bond between `site` and `site + 1`.
    pub fn coupling(&self, site: i64) -> f64 {
        if site < 0 {
            self.bulk_minus.coupling
        } else if site >= self.n() as i64 {
            self.bulk_plus.coupling
        } else {
            self.couplings[site as usize]
        }
    }

    fn block_index(&self, site: i64) -> Option<usize> {
        (site >= 0 && site <= self.n() as i64).then_some(site as usize)
    }

    pub fn has_uniform_bulk(&self) -> bool {
        self.bulk_minus == self.bulk_plus
    }

    /// All pinnings, bulk and block, vanish.
    pub fn all_pinning_zero(&self) -> bool {
        self.bulk_minus.pinning == 0.0
            && self.bulk_plus.pinning == 0.0
            && self.defects.iter().all(|d| d.pinning == 0.0)
    }

    /// Largest local frequency `sqrt((μ_n + 2γ_{n-1} + 2γ_n)/m_n)` over the
    /// block and both bulks. Bounds the spectrum of every finite window.
    pub fn omega_max_local(&self) -> f64 {
        let n = self.n() as i64;
        (-1..=n + 1)
            .map(|s| (self.pinning(s) + 2.0 * self.coupling(s - 1) + 2.0 * self.coupling(s)) / self.mass(s))
            .fold(0.0_f64, f64::max)
            .sqrt()
    }

    /// Fastest group velocity in either bulk.
    pub fn max_group_velocity(&self) -> f64 {
        self.bulk_minus.nu().max(self.bulk_plus.nu())
    }

    /// Mirror image `n -> N - n`, which swaps the bulks.
    pub fn mirrored(&self) -> Chain {
        let mut defects = self.defects.clone();
        defects.reverse();
        let mut couplings = self.couplings.clone();
        couplings.reverse();
        Chain { bulk_minus: self.bulk_plus, bulk_plus: self.bulk_minus, defects, couplings }
    }
}

fn check_positive(name: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

fn check_nonnegative(name: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be non-negative and finite, got {x}")))
    }
}

/// Displacements `u` and momenta `v = m u̇` on the window `[lo, lo + len)`.
/// Sites outside the window are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub lo: i64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl LatticeState {
    pub fn zeros(lo: i64, hi: i64) -> Self {
        assert!(hi >= lo, "empty window");
        let len = (hi - lo + 1) as usize;
        Self { lo, u: vec![0.0; len], v: vec![0.0; len] }
    }

    /// Last site of the window.
    pub fn hi(&self) -> i64 {
        self.lo + self.u.len() as i64 - 1
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.lo..=self.hi()
    }

    pub fn index(&self, site: i64) -> Option<usize> {
        (site >= self.lo && site <= self.hi()).then(|| (site - self.lo) as usize)
    }

    pub fn u_at(&self, site: i64) -> f64 {
        self.index(site).map_or(0.0, |i| self.u[i])
    }

    pub fn v_at(&self, site: i64) -> f64 {
        self.index(site).map_or(0.0, |i| self.v[i])
    }

    pub fn set(&mut self, site: i64, u: f64, v: f64) {
        let i = self.index(site).expect("site outside window");
        self.u[i] = u;
        self.v[i] = v;
    }

    /// Smallest and largest sites with nonzero data.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz: Vec<i64> = self
            .sites()
            .zip(self.u.iter().zip(&self.v))
            .filter(|(_, (u, v))| **u != 0.0 || **v != 0.0)
            .map(|(s, _)| s)
            .collect();
        Some((*nz.first()?, *nz.last()?))
    }

    /// Copy of the state on a larger window.
    pub fn embedded(&self, lo: i64, hi: i64) -> LatticeState {
        assert!(lo <= self.lo && hi >= self.hi(), "target window must contain the state");
        let mut out = LatticeState::zeros(lo, hi);
        for s in self.sites() {
            out.set(s, self.u_at(s), self.v_at(s));
        }
        out
    }
}

/// Energy of a windowed state together with a truncation flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub value: f64,
    /// The state is nonzero on a window edge, so the infinite-chain energy
    /// may differ from the window value.
    pub touches_edge: bool,
}

/// `H = ½ Σ (v²/m + γ (u(n+1) − u(n))² + μ u²)` with zeros outside the
/// window, so the bonds to the two outer neighbours are included.
pub fn energy(chain: &Chain, state: &LatticeState) -> Energy {
    let mut h = 0.0;
    for s in state.sites() {
        let (u, v) = (state.u_at(s), state.v_at(s));
        h += v * v / chain.mass(s) + chain.pinning(s) * u * u;
    }
    for s in state.lo - 1..=state.hi() {
        let du = state.u_at(s + 1) - state.u_at(s);
        h += chain.coupling(s) * du * du;
    }
    let last = state.u.len() - 1;
    let touches_edge = [0, last].iter().any(|&i| state.u[i] != 0.0 || state.v[i] != 0.0);
    Energy { value: 0.5 * h, touches_edge }
}

/// `‖Y‖_α = sqrt(Σ ⟨n⟩^{2α} (u² + v²))` with `⟨n⟩ = sqrt(1 + n²)`.
pub fn weighted_norm(state: &LatticeState, alpha: f64) -> f64 {
    state
        .sites()
        .zip(state.u.iter().zip(&state.v))
        .map(|(s, (u, v))| (1.0 + (s * s) as f64).powf(alpha) * (u * u + v * v))
        .sum::<f64>()
        .sqrt()
}
