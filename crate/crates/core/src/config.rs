//! TOML chain files and the bundled examples.
//!
//! ```toml
//! name = "single heavy pinned defect"     # optional
//!
//! [bulk_minus]
//! mass = 1.0
//! coupling = 1.0
//! pinning = 0.0
//!
//! [bulk_plus]
//! mass = 1.0
//! coupling = 1.0
//! pinning = 0.0
//!
//! [[defects]]                              # sites 0..=N in order
//! mass = 2.0
//! pinning = 1.0
//!
//! couplings = []                           # N bonds inside the block
//!
//! [[initial]]                              # optional initial data
//! site = 0
//! u = 1.0
//! v = 0.0
//!
//! [run]                                    # optional defaults
//! horizon = 400.0
//! alpha = 2.0
//! ```
//!
//! `couplings` must appear before the first table in the file, as TOML
//! requires for top-level keys.

use crate::chain::{Bulk, Chain, DefectSite, LatticeState};
use crate::error::ConfigError;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialValue {
    pub site: i64,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub v: f64,
}

/// Optional numeric defaults carried by a chain file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDefaults {
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub alpha: Option<f64>,
    pub stride: Option<usize>,
    pub fit_window: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: Option<String>,
    #[serde(default)]
    couplings: Vec<f64>,
    bulk_minus: Bulk,
    bulk_plus: Bulk,
    defects: Vec<DefectSite>,
    #[serde(default)]
    initial: Vec<InitialValue>,
    #[serde(default)]
    run: RunDefaults,
}

/// A parsed and validated chain file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub name: Option<String>,
    pub chain: Chain,
    pub initial: Option<LatticeState>,
    pub run: RunDefaults,
}

pub fn parse_config(text: &str) -> Result<ChainConfig, ConfigError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim().replace('\n', " ")))?;
    let chain = Chain::new(raw.bulk_minus, raw.bulk_plus, raw.defects, raw.couplings)?;
    let initial = if raw.initial.is_empty() {
        None
    } else {
        let lo = raw.initial.iter().map(|p| p.site).min().unwrap().min(0);
        let hi = raw.initial.iter().map(|p| p.site).max().unwrap().max(chain.n() as i64);
        let mut y = LatticeState::zeros(lo, hi);
        for p in &raw.initial {
            if !(p.u.is_finite() && p.v.is_finite()) {
                return Err(ConfigError::Invalid(format!("initial value at site {} is not finite", p.site)));
            }
            if y.u_at(p.site) != 0.0 || y.v_at(p.site) != 0.0 {
                return Err(ConfigError::Invalid(format!("site {} appears twice in initial", p.site)));
            }
            y.set(p.site, p.u, p.v);
        }
        Some(y)
    };
    if let Some(h) = raw.run.horizon {
        if !(h.is_finite() && h > 0.0) {
            return Err(ConfigError::Invalid(format!("run.horizon must be positive, got {h}")));
        }
    }
    if let Some([a, b]) = raw.run.fit_window {
        if !(a > 0.0 && b > a) {
            return Err(ConfigError::Invalid(format!("run.fit_window [{a}, {b}] must satisfy 0 < start < end")));
        }
    }
    Ok(ChainConfig { name: raw.name, chain, initial, run: raw.run })
}

/// Chain files shipped with the crate, by short name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("p1_c", include_str!("../../../configs/p1_c.toml")),
    ("p1_c0_i", include_str!("../../../configs/p1_c0_i.toml")),
    ("p1_c0_ii", include_str!("../../../configs/p1_c0_ii.toml")),
    ("p1_c0_iii", include_str!("../../../configs/p1_c0_iii.toml")),
    ("p2_c", include_str!("../../../configs/p2_c.toml")),
    ("p3_c", include_str!("../../../configs/p3_c.toml")),
    ("r1", include_str!("../../../configs/r1.toml")),
    ("r2", include_str!("../../../configs/r2.toml")),
    ("r3", include_str!("../../../configs/r3.toml")),
    ("n2_uniform", include_str!("../../../configs/n2_uniform.toml")),
];

pub fn bundled(name: &str) -> Result<ChainConfig, ConfigError> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ConfigError::Invalid(format!("no bundled chain named {name}")))?;
    parse_config(text)
}

/// Small compact initial data touching both bulks and the block, used when
/// a file carries none.
pub fn default_initial(chain: &Chain) -> LatticeState {
    let n = chain.n() as i64;
    let mut y = LatticeState::zeros(-3, n + 3);
    y.set(-3, 0.5, 0.0);
    y.set(-1, 0.2, -0.3);
    y.set(0, 1.0, 0.2);
    y.set(n + 2, 0.0, 0.7);
    y
}

impl ChainConfig {
    pub fn initial_or_default(&self) -> LatticeState {
        self.initial.clone().unwrap_or_else(|| default_initial(&self.chain))
    }
}
