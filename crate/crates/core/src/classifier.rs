//! Condition C, condition C₀ or resonance.
//!
//! A chain satisfies condition C when `det D̃(ω) ≠ 0` on the real gaps and at
//! every band edge, and condition C₀ when the determinant still has no zero
//! in the gaps but vanishes at some nonzero band edge (with `D̃(0)` regular
//! when all bulk pinnings vanish). Everything else is a resonance: either a
//! zero mode at `ω = 0` or a real zero `ω*` in a gap.
//!
//! For a single defect site the decision uses closed-form thresholds on
//! `μ_0`; for longer blocks with equal bulks it uses the signs of the leading
//! minors of `D̃(a)` and `D̃(κ)`.

use crate::chain::{BulkSide, Chain};
use crate::dispersion::Approach;
use crate::error::NumericError;
use crate::jacobi::{assemble_frame, negative_count, FrameMode, MinorLadder};
use std::fmt;

/// Relative width of the band in which a criterion counts as an equality.
pub const EQUALITY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Gt,
    Ne,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Gt => ">",
            Relation::Ne => "!=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Boundary,
    Fails,
    /// The criterion did not take part in the decision.
    Skipped,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Boundary => "boundary",
            Outcome::Fails => "fails",
            Outcome::Skipped => "skipped",
        })
    }
}

/// One evaluated criterion: `quantity relation threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrailEntry {
    pub criterion: String,
    pub quantity: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResonanceKind {
    /// `det D̃(0) = 0` with `0` a band edge.
    ZeroMode,
    /// `det D̃(ω*) = 0` at a real `ω*` outside the spectrum.
    RealZero { omega_star: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    C,
    C0 { witness: f64, clause: &'static str },
    Resonance(ResonanceKind),
}

/// Coarse label used to compare verdicts from different routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    C,
    C0,
    ZeroMode,
    RealZero,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::C => "condition-C",
            VerdictKind::C0 => "condition-C0",
            VerdictKind::ZeroMode => "resonance-zero-mode",
            VerdictKind::RealZero => "resonance-real-zero",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub regime: Regime,
    pub trail: Vec<TrailEntry>,
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self.regime {
            Regime::C => VerdictKind::C,
            Regime::C0 { .. } => VerdictKind::C0,
            Regime::Resonance(ResonanceKind::ZeroMode) => VerdictKind::ZeroMode,
            Regime::Resonance(ResonanceKind::RealZero { .. }) => VerdictKind::RealZero,
        }
    }

    /// `β` in the decay bound `t^{−β/2}`: 3 under C, 1 under C₀.
    pub fn decay_beta(&self) -> Option<u32> {
        match self.regime {
            Regime::C => Some(3),
            Regime::C0 { .. } => Some(1),
            Regime::Resonance(_) => None,
        }
    }

    pub fn c0_witness(&self) -> Option<f64> {
        match self.regime {
            Regime::C0 { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn resonance(&self) -> Option<ResonanceKind> {
        match self.regime {
            Regime::Resonance(k) => Some(k),
            _ => None,
        }
    }

    /// Plain-text report: a header of `key: value` lines followed by one
    /// tab-separated trail row per criterion.
    pub fn report(&self) -> String {
        let mut out = format!("kind: {}\n", self.kind());
        let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
        out += &format!("decay_beta: {}\n", opt(self.decay_beta().map(|b| b.to_string())));
        let (w, clause) = match &self.regime {
            Regime::C0 { witness, clause } => (Some(format!("{witness:.17e}")), Some(clause.to_string())),
            _ => (None, None),
        };
        out += &format!("c0_witness: {}\n", opt(w));
        out += &format!("c0_clause: {}\n", opt(clause));
        let star = match self.regime {
            Regime::Resonance(ResonanceKind::RealZero { omega_star }) => Some(format!("{omega_star:.17e}")),
            _ => None,
        };
        out += &format!("omega_star: {}\n", opt(star));
        out += &format!("equality_band: {EQUALITY_BAND:e}\n");
        out += "trail:\n";
        for e in &self.trail {
            out += &format!(
                "  {}\t{:.17e}\t{}\t{:.17e}\t{}\n",
                e.criterion, e.quantity, e.relation, e.threshold, e.outcome
            );
        }
        out
    }
}

/// Three-way comparison with the equality band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Below,
    Equal,
    Above,
}

fn compare(lhs: f64, rhs: f64) -> Cmp {
    compare_scaled(lhs, rhs, rhs.abs().max(1.0))
}

fn compare_scaled(lhs: f64, rhs: f64, scale: f64) -> Cmp {
    if (lhs - rhs).abs() <= EQUALITY_BAND * scale {
        Cmp::Equal
    } else if lhs < rhs {
        Cmp::Below
    } else {
        Cmp::Above
    }
}

fn outcome(cmp: Cmp, want: Relation) -> Outcome {
    match (cmp, want) {
        (Cmp::Equal, _) => Outcome::Boundary,
        (Cmp::Below, Relation::Lt) | (Cmp::Above, Relation::Gt) => Outcome::Holds,
        (Cmp::Below | Cmp::Above, Relation::Ne) => Outcome::Holds,
        _ => Outcome::Fails,
    }
}

fn entry(criterion: impl Into<String>, quantity: f64, relation: Relation, threshold: f64, cmp: Cmp) -> TrailEntry {
    TrailEntry { criterion: criterion.into(), quantity, relation, threshold, outcome: outcome(cmp, relation) }
}

/// `K_0`, `K_−`, `K_+` at `ω`, each present only on its domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KValues {
    pub k0: Option<f64>,
    pub k_minus: Option<f64>,
    pub k_plus: Option<f64>,
}

fn kappa_bar_sq(chain: &Chain) -> f64 {
    0.5 * (chain.bulk_minus.kappa_sq() + chain.bulk_plus.kappa_sq())
}

/// Square root of a radicand that may sit a few ulps off zero at an edge.
fn sqrt_clamped(x: f64, scale: f64) -> Option<f64> {
    if x.abs() <= 1e-12 * scale.max(1.0) {
        Some(0.0)
    } else if x > 0.0 {
        Some(x.sqrt())
    } else {
        None
    }
}

/// `K_0(ω) = κ̄² − ½ sqrt(κ_+² − ω²) sqrt(a_+² − ω²)` for `|ω| ≤ κ_+`.
pub fn k0(chain: &Chain, omega: f64) -> Result<f64, NumericError> {
    let b = &chain.bulk_plus;
    let w2 = omega * omega;
    let a2 = b.a() * b.a();
    sqrt_clamped(b.kappa_sq() - w2, a2)
        .map(|r| kappa_bar_sq(chain) - 0.5 * r * (a2 - w2).sqrt())
        .ok_or_else(|| domain_error("K0", format!("|omega| <= {}", b.kappa())))
}

/// `K_±(ω) = κ̄² + ½ sqrt(ω² − κ_±²) sqrt(ω² − a_±²)` for `|ω| ≥ a_±`.
pub fn k_side(chain: &Chain, side: BulkSide, omega: f64) -> Result<f64, NumericError> {
    let b = chain.bulk(side);
    let w2 = omega * omega;
    let a2 = b.a() * b.a();
    sqrt_clamped(w2 - a2, a2)
        .map(|r| kappa_bar_sq(chain) + 0.5 * (w2 - b.kappa_sq()).sqrt() * r)
        .ok_or_else(|| domain_error(if side == BulkSide::Minus { "K-" } else { "K+" }, format!("|omega| >= {}", b.a())))
}

pub fn k_functions(chain: &Chain, omega: f64) -> KValues {
    KValues {
        k0: k0(chain, omega).ok(),
        k_minus: k_side(chain, BulkSide::Minus, omega).ok(),
        k_plus: k_side(chain, BulkSide::Plus, omega).ok(),
    }
}

fn domain_error(name: &str, interval: String) -> NumericError {
    NumericError::Config(crate::error::ConfigError::Invalid(format!("{name} is defined only for {interval}")))
}

/// Dispatches on the block length.
pub fn classify(chain: &Chain) -> Result<Verdict, NumericError> {
    if chain.n() == 0 {
        Ok(classify_n0(chain))
    } else {
        classify_general(chain)
    }
}

/// Which edge a single-site threshold refers to.
#[derive(Debug, Clone, Copy)]
struct Threshold {
    id: &'static str,
    clause: &'static str,
    edge: f64,
    value: f64,
    /// `Lt`: condition C needs `μ_0 < value`; `Gt`: `μ_0 > value`.
    relation: Relation,
}

impl Threshold {
    fn cmp(&self, mu0: f64) -> Cmp {
        compare(mu0, self.value)
    }

    fn strict(&self, mu0: f64) -> bool {
        outcome(self.cmp(mu0), self.relation) == Outcome::Holds
    }

    fn weak(&self, mu0: f64) -> bool {
        outcome(self.cmp(mu0), self.relation) != Outcome::Fails
    }
}

/// Thresholds on `μ_0` for a single site, on a chain oriented so that
/// `κ_− ≤ κ_+`. Each one is `μ_0` minus the value of `D̃` at a band edge.
struct SingleSite {
    mu0: f64,
    edges: Vec<Threshold>,
    /// `D̃(κ_+) > 0` or `D̃(a_−) < 0` when `a_− ≤ κ_+`.
    gap: Option<(Threshold, Threshold)>,
    zero_clause: bool,
}

fn orient(chain: &Chain) -> (Chain, bool) {
    if chain.bulk_minus.kappa() > chain.bulk_plus.kappa() { (chain.mirrored(), true) } else { (chain.clone(), false) }
}

impl SingleSite {
    fn new(c: &Chain) -> Self {
        let (bm, bp) = (c.bulk_minus, c.bulk_plus);
        let m0 = c.defects[0].mass;
        let (km, kp, am, ap) = (bm.kappa(), bp.kappa(), bm.a(), bp.a());
        let mbar = 0.5 * (bm.mass + bp.mass);
        let minus_a_part = bm.kappa_sq() * (m0 - bp.mass) + 4.0 * bm.nu_sq() * (m0 - mbar);
        let plus_a_part = bp.kappa_sq() * (m0 - bm.mass) + 4.0 * bp.nu_sq() * (m0 - mbar);
        let k = |r: Result<f64, NumericError>| r.expect("threshold evaluated inside its domain");
        let mut edges = Vec::new();
        if am >= ap {
            let clause = if am == ap { "iii" } else { "i" };
            let value = minus_a_part + bp.mass * k(k_side(c, BulkSide::Plus, am));
            edges.push(Threshold { id: "D(a-) < 0", clause, edge: am, value, relation: Relation::Lt });
        } else {
            let value = plus_a_part + bm.mass * k(k_side(c, BulkSide::Minus, ap));
            edges.push(Threshold { id: "D(a+) < 0", clause: "ii", edge: ap, value, relation: Relation::Lt });
        }
        if km > 0.0 {
            let value = bm.kappa_sq() * (m0 - bp.mass) + bp.mass * k(k0(c, km));
            edges.push(Threshold { id: "D(kappa-) > 0", clause: "iv", edge: km, value, relation: Relation::Gt });
        }
        let gap = (am <= kp).then(|| {
            let upper = Threshold {
                id: "D(kappa+) > 0",
                clause: "v",
                edge: kp,
                value: bp.kappa_sq() * (m0 - bm.mass) + bm.mass * k(k_side(c, BulkSide::Minus, kp)),
                relation: Relation::Gt,
            };
            let lower = Threshold {
                id: "D(a-) < 0 in gap",
                clause: "vi",
                edge: am,
                value: minus_a_part + bp.mass * k(k0(c, am)),
                relation: Relation::Lt,
            };
            (upper, lower)
        });
        Self { mu0: c.defects[0].pinning, edges, gap, zero_clause: bm.pinning == 0.0 && bp.pinning == 0.0 }
    }

    fn trail(&self) -> Vec<TrailEntry> {
        let mut t: Vec<TrailEntry> =
            self.edges.iter().map(|e| entry(e.id, self.mu0, e.relation, e.value, e.cmp(self.mu0))).collect();
        if let Some((u, l)) = &self.gap {
            for e in [u, l] {
                t.push(entry(e.id, self.mu0, e.relation, e.value, e.cmp(self.mu0)));
            }
        }
        if self.zero_clause {
            t.push(entry("mu0 != 0 (unpinned bulks)", self.mu0, Relation::Ne, 0.0, compare(self.mu0, 0.0)));
        }
        t
    }

    /// Decision without the root search.
    fn decide(&self) -> Decision {
        if self.zero_clause && compare(self.mu0, 0.0) == Cmp::Equal {
            return Decision::ZeroMode;
        }
        let q = self.mu0;
        let gap_strict = self.gap.as_ref().is_none_or(|(u, l)| u.strict(q) || l.strict(q));
        let gap_weak = self.gap.as_ref().is_none_or(|(u, l)| u.weak(q) || l.weak(q));
        if self.edges.iter().all(|e| e.strict(q)) && gap_strict {
            return Decision::C;
        }
        if !(self.edges.iter().all(|e| e.weak(q)) && gap_weak) {
            return Decision::RealZero;
        }
        let mut zeros = self.edges.iter().filter(|e| e.cmp(q) == Cmp::Equal).copied().collect::<Vec<_>>();
        if !gap_strict {
            if let Some((u, l)) = &self.gap {
                zeros.extend([u, l].into_iter().filter(|e| e.cmp(q) == Cmp::Equal).copied());
            }
        }
        match zeros.first() {
            Some(t) => Decision::C0 { witness: t.edge, clause: t.clause },
            None => Decision::RealZero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Decision {
    C,
    C0 { witness: f64, clause: &'static str },
    ZeroMode,
    RealZero,
}

impl Decision {
    fn kind(&self) -> VerdictKind {
        match self {
            Decision::C => VerdictKind::C,
            Decision::C0 { .. } => VerdictKind::C0,
            Decision::ZeroMode => VerdictKind::ZeroMode,
            Decision::RealZero => VerdictKind::RealZero,
        }
    }
}

fn finish(chain: &Chain, decision: Decision, mut trail: Vec<TrailEntry>) -> Verdict {
    let regime = match decision {
        Decision::C => Regime::C,
        Decision::C0 { witness, clause } => Regime::C0 { witness, clause },
        Decision::ZeroMode => Regime::Resonance(ResonanceKind::ZeroMode),
        Decision::RealZero => {
            let omega_star = match find_spectral_zero(chain) {
                Some(w) => w,
                None => {
                    // Only reachable inside a hair of an equality; report the
                    // edge the failed criterion points at.
                    let w = nearest_failed_edge(&trail, chain);
                    trail.push(TrailEntry {
                        criterion: "root search found no sign change; omega* taken at the edge".into(),
                        quantity: w,
                        relation: Relation::Ne,
                        threshold: 0.0,
                        outcome: Outcome::Boundary,
                    });
                    w
                }
            };
            Regime::Resonance(ResonanceKind::RealZero { omega_star })
        }
    };
    Verdict { regime, trail }
}

fn nearest_failed_edge(trail: &[TrailEntry], chain: &Chain) -> f64 {
    let fails_a = trail.iter().any(|e| e.outcome == Outcome::Fails && e.criterion.contains("(a"));
    let a = chain.bulk_minus.a().max(chain.bulk_plus.a());
    let k = chain.bulk_minus.kappa().min(chain.bulk_plus.kappa());
    if fails_a { a } else { k }
}

/// Single defect site, arbitrary bulks.
pub fn classify_n0(chain: &Chain) -> Verdict {
    assert_eq!(chain.n(), 0, "classify_n0 needs a single defect site");
    let (oriented, flipped) = orient(chain);
    let site = SingleSite::new(&oriented);
    let decision = site.decide();
    let mut trail = site.trail();
    if flipped {
        trail.insert(
            0,
            TrailEntry {
                criterion: "sides relabelled so that kappa- <= kappa+".into(),
                quantity: chain.bulk_minus.kappa(),
                relation: Relation::Gt,
                threshold: chain.bulk_plus.kappa(),
                outcome: Outcome::Holds,
            },
        );
    }
    let special: [(&str, Option<Decision>); 3] =
        [("P1", p1_decision(chain)), ("P2", p2_decision(chain)), ("P3", p3_decision(chain))];
    for (name, d) in special {
        if let Some(d) = d {
            let agree = d.kind() == decision.kind();
            debug_assert!(agree, "{name} form gives {} but the general test gives {}", d.kind(), decision.kind());
            trail.push(TrailEntry {
                criterion: format!("{name} form agrees ({})", d.kind()),
                quantity: agree as u8 as f64,
                relation: Relation::Ne,
                threshold: 0.0,
                outcome: if agree { Outcome::Holds } else { Outcome::Fails },
            });
        }
    }
    finish(chain, decision, trail)
}

/// Verdict kind from the equal-bulk single-site form, when it applies.
pub fn classify_p1(chain: &Chain) -> Option<VerdictKind> {
    p1_decision(chain).map(|d| d.kind())
}

/// Verdict kind from the unit-mass form, when it applies.
pub fn classify_p2(chain: &Chain) -> Option<VerdictKind> {
    p2_decision(chain).map(|d| d.kind())
}

/// Verdict kind from the unpinned-bulk form, when it applies.
pub fn classify_p3(chain: &Chain) -> Option<VerdictKind> {
    p3_decision(chain).map(|d| d.kind())
}

fn p1_decision(chain: &Chain) -> Option<Decision> {
    if chain.n() != 0 || !chain.has_uniform_bulk() {
        return None;
    }
    let b = chain.bulk_minus;
    let (m, g, mu) = (b.mass, b.coupling, b.pinning);
    let (m0, mu0) = (chain.defects[0].mass, chain.defects[0].pinning);
    let x = mu0 / m0 - mu / m;
    let y = x + 4.0 * g * (1.0 / m0 - 1.0 / m);
    let zero = |v: f64, scale: f64| compare_scaled(v, 0.0, scale) == Cmp::Equal;
    let sx = (mu0 / m0).abs() + (mu / m).abs();
    let sy = sx + 4.0 * g * (1.0 / m0 + 1.0 / m);
    let (x0, y0) = (zero(x, sx.max(1.0)), zero(y, sy.max(1.0)));
    let (mu0_zero, mu_zero) = (zero(mu0, 1.0), zero(mu, 1.0));
    Some(if mu0_zero && mu_zero {
        Decision::ZeroMode
    } else if x > 0.0 && !x0 && y < 0.0 && !y0 {
        Decision::C
    } else if !mu0_zero && !mu_zero && x0 && y0 {
        Decision::C0 { witness: b.kappa(), clause: "i" }
    } else if !mu0_zero && !mu_zero && x0 && m0 > m {
        Decision::C0 { witness: b.kappa(), clause: "ii" }
    } else if !mu0_zero && x > 0.0 && !x0 && y0 {
        Decision::C0 { witness: b.a(), clause: "iii" }
    } else {
        Decision::RealZero
    })
}

fn p2_decision(chain: &Chain) -> Option<Decision> {
    let unit = chain.bulk_minus.mass == 1.0 && chain.bulk_plus.mass == 1.0 && chain.defects[0].mass == 1.0;
    if chain.n() != 0 || !unit {
        return None;
    }
    let (c, _) = orient(chain);
    let (bm, bp) = (c.bulk_minus, c.bulk_plus);
    let (km, kp, am, ap) = (bm.kappa(), bp.kappa(), bm.a(), bp.a());
    let mu0 = c.defects[0].pinning;
    if bm.pinning == 0.0 && bp.pinning == 0.0 && compare(mu0, 0.0) == Cmp::Equal {
        return Some(Decision::ZeroMode);
    }
    let kbar2 = kappa_bar_sq(&c);
    let kp_at = |w| k_side(&c, BulkSide::Plus, w).unwrap();
    let km_at = |w| k_side(&c, BulkSide::Minus, w).unwrap();
    let k0_at = |w| k0(&c, w).unwrap();
    let mut edges = Vec::new();
    if am > ap {
        edges.push(Threshold { id: "", clause: "i", edge: am, value: kp_at(am), relation: Relation::Lt });
    } else if ap > am {
        edges.push(Threshold { id: "", clause: "ii", edge: ap, value: km_at(ap), relation: Relation::Lt });
    } else {
        edges.push(Threshold { id: "", clause: "iii", edge: am, value: kbar2, relation: Relation::Lt });
    }
    if km != 0.0 {
        let v = k0_at(km);
        edges.push(Threshold { id: "", clause: "iv", edge: km, value: v, relation: Relation::Gt });
    }
    let gap = (am <= kp).then(|| {
        (
            Threshold { id: "", clause: "v", edge: kp, value: km_at(kp), relation: Relation::Gt },
            Threshold { id: "", clause: "vi", edge: am, value: k0_at(am), relation: Relation::Lt },
        )
    });
    // Clauses (iv) and (vi) carry the guard K_0 >= 0; with mu0 >= 0 an
    // equality against a negative K_0 cannot occur, so no extra test is needed.
    Some(SingleSite { mu0, edges, gap, zero_clause: false }.decide())
}

fn p3_decision(chain: &Chain) -> Option<Decision> {
    let (bm, bp) = (chain.bulk_minus, chain.bulk_plus);
    let mu0 = chain.defects[0].pinning;
    if chain.n() != 0 || bm.pinning != 0.0 || bp.pinning != 0.0 || mu0 <= 0.0 {
        return None;
    }
    let m0 = chain.defects[0].mass;
    let mbar = 0.5 * (bm.mass + bp.mass);
    let (nm2, np2) = (bm.nu_sq(), bp.nu_sq());
    let mut bounds = Vec::new();
    if nm2 >= np2 {
        bounds.push((4.0 * nm2 * (m0 - mbar) + 2.0 * bp.mass * bm.nu() * (nm2 - np2).sqrt(), bm.a(), "i"));
    }
    if np2 >= nm2 {
        bounds.push((4.0 * np2 * (m0 - mbar) + 2.0 * bm.mass * bp.nu() * (np2 - nm2).sqrt(), bp.a(), "ii"));
    }
    let cmps: Vec<Cmp> = bounds.iter().map(|(b, _, _)| compare(mu0, *b)).collect();
    Some(if cmps.iter().all(|c| *c == Cmp::Below) {
        Decision::C
    } else if cmps.iter().all(|c| *c != Cmp::Above) {
        let i = cmps.iter().position(|c| *c == Cmp::Equal).unwrap();
        Decision::C0 { witness: bounds[i].1, clause: bounds[i].2 }
    } else {
        Decision::RealZero
    })
}

/// Sign of a leading minor at an edge, with its own equality scale.
fn minor_entry(label: String, value: f64, want_negative: bool, scale: f64) -> (TrailEntry, Cmp) {
    let cmp = compare_scaled(value, 0.0, scale);
    let relation = if want_negative { Relation::Lt } else { Relation::Gt };
    (entry(label, value, relation, 0.0, cmp), cmp)
}

/// Sign pattern of the minors of one substituted frame.
struct EdgeLadder {
    /// All minors strictly of the definite sign.
    definite: bool,
    /// Minors below `N` definite and `α_N` in the equality band.
    edge_zero: bool,
}

fn edge_ladder(chain: &Chain, mode: FrameMode, trail: &mut Vec<TrailEntry>) -> EdgeLadder {
    let frame = assemble_frame(chain, mode).expect("uniform bulk checked by caller");
    let ladder = MinorLadder::new(&frame);
    let n = chain.n();
    let (tag, negative) = match mode {
        FrameMode::AtA => ("a", true),
        _ => ("kappa", false),
    };
    let mut scale = 1.0;
    let mut cmps = Vec::with_capacity(n + 1);
    for i in 0..=n {
        scale *= frame.diag[i].norm().max(1.0);
        let alpha = ladder.alpha(i as isize).re;
        let (value, label) = if negative {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            (sign * alpha, format!("(-1)^{i} alpha_{i}({tag})"))
        } else {
            (alpha, format!("alpha_{i}({tag})"))
        };
        let (e, c) = minor_entry(label, value, negative, scale);
        trail.push(e);
        cmps.push(c);
    }
    let good = if negative { Cmp::Below } else { Cmp::Above };
    let inner = cmps[..n].iter().all(|c| *c == good);
    EdgeLadder { definite: inner && cmps[n] == good, edge_zero: inner && cmps[n] == Cmp::Equal }
}

/// Blocks of two or more sites between equal bulks.
pub fn classify_general(chain: &Chain) -> Result<Verdict, NumericError> {
    if !chain.has_uniform_bulk() {
        return Err(NumericError::Unsupported("blocks between different bulks".into()));
    }
    if chain.n() == 0 {
        return Ok(classify_n0(chain));
    }
    let bulk = chain.bulk_minus;
    let mut trail = Vec::new();
    if chain.all_pinning_zero() {
        trail.push(entry("some pinning nonzero", 0.0, Relation::Ne, 0.0, Cmp::Equal));
        return Ok(finish(chain, Decision::ZeroMode, trail));
    }
    let at_a = edge_ladder(chain, FrameMode::AtA, &mut trail);
    let pinned = bulk.pinning != 0.0;
    let at_k = if pinned {
        edge_ladder(chain, FrameMode::AtKappa, &mut trail)
    } else {
        EdgeLadder { definite: true, edge_zero: false }
    };
    let decision = if at_a.definite && at_k.definite {
        Decision::C
    } else if (at_a.definite || at_a.edge_zero) && (at_k.definite || at_k.edge_zero) {
        if at_a.edge_zero {
            Decision::C0 { witness: bulk.a(), clause: "a-edge" }
        } else {
            Decision::C0 { witness: bulk.kappa(), clause: "kappa-edge" }
        }
    } else {
        Decision::RealZero
    };
    if matches!(decision, Decision::C | Decision::C0 { .. }) {
        let half = 0.5 * bulk.mass;
        for (label, m) in [("m_0 > m/2", chain.defects[0].mass), ("m_N > m/2", chain.defects[chain.n()].mass)] {
            let e = entry(label, m, Relation::Gt, half, compare(m, half));
            debug_assert_eq!(e.outcome, Outcome::Holds, "necessary mass condition violated");
            trail.push(e);
        }
    }
    Ok(finish(chain, decision, trail))
}

/// Upper end of the root search. Beyond it every row of `D̃` is strictly
/// negative and diagonally dominant.
pub fn omega_search_max(chain: &Chain) -> f64 {
    let a = chain.bulk_minus.a().max(chain.bulk_plus.a());
    (2.0 * a + 1.0).max(chain.omega_max_local() * (1.0 + 1e-9) + 1e-9)
}

/// Open intervals of `[0, Ω_max]` outside both bands.
pub fn spectral_gaps(chain: &Chain) -> Vec<(f64, f64)> {
    let mut bands = vec![chain.bulk_minus.band(), chain.bulk_plus.band()];
    bands.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for b in bands {
        match merged.last_mut() {
            Some(last) if b.0 <= last.1 => last.1 = last.1.max(b.1),
            _ => merged.push(b),
        }
    }
    let mut gaps = Vec::new();
    let mut lo = 0.0;
    for (k, a) in merged {
        if k > lo {
            gaps.push((lo, k));
        }
        lo = a;
    }
    gaps.push((lo, omega_search_max(chain)));
    gaps
}

fn gap_inertia(chain: &Chain, omega: f64) -> usize {
    let frame = assemble_frame(chain, FrameMode::Analytic(Approach::Above(omega))).expect("real gap point");
    negative_count(&frame)
}

/// Smallest real `ω* ≥ 0` outside the spectrum with `det D̃(ω*) = 0`.
///
/// In each gap the eigenvalues of the real matrix `D̃(ω)` decrease
/// strictly with `ω`, so the number of negative eigenvalues only grows and
/// a zero exists exactly when that count differs at the two ends.
pub fn find_spectral_zero(chain: &Chain) -> Option<f64> {
    let edges: Vec<f64> = [&chain.bulk_minus, &chain.bulk_plus].iter().flat_map(|b| [b.kappa(), b.a()]).collect();
    for (lo, hi) in spectral_gaps(chain) {
        let nudge = |x: f64, dir: f64| {
            if edges.contains(&x) { x + dir * 1e-13 * x.max(1.0) } else { x }
        };
        let (mut l, mut r) = (nudge(lo, 1.0), nudge(hi, -1.0));
        if l >= r {
            continue;
        }
        let base = gap_inertia(chain, l);
        if gap_inertia(chain, r) == base {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (l + r);
            if mid <= l || mid >= r {
                break;
            }
            if gap_inertia(chain, mid) == base {
                l = mid;
            } else {
                r = mid;
            }
        }
        return Some(0.5 * (l + r));
    }
    None
}
