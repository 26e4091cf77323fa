//! Acceptance battery. Each criterion runs its own numerical experiment
//! against oracles that do not share code paths with the library, and
//! reports a single pass or fail line.

mod algebra;
mod dynamics;
mod oracle;

use std::fmt;
use std::time::Instant;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    /// Measured quantities, one short phrase each.
    pub details: Vec<String>,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2}: {} {} [{}] ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.details.join("; "),
            self.seconds
        )
    }
}

pub const IDS: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Collects named checks and their measured values.
#[derive(Default)]
pub(crate) struct Tally {
    passed: bool,
    details: Vec<String>,
}

impl Tally {
    pub(crate) fn new() -> Self {
        Self { passed: true, details: vec![] }
    }

    pub(crate) fn check(&mut self, ok: bool, detail: impl Into<String>) {
        let d = detail.into();
        self.details.push(if ok { d } else { format!("FAILED {d}") });
        self.passed &= ok;
    }

    /// Records an error from the library as a failed check.
    pub(crate) fn error(&mut self, what: &str, err: impl fmt::Display) {
        self.check(false, format!("{what}: {err}"));
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "tridiagonal algebra against dense oracles",
        2 => "dispersion branch",
        3 => "symbol determinant nonzero in the upper half plane",
        4 => "classifier equivalences",
        5 => "energy conservation",
        6 => "decay under condition C",
        7 => "decay under condition C0",
        8 => "half-line boundary kernel bound",
        9 => "resonance limits and standing waves",
        10 => "kernel representation against simulation",
        _ => "unknown criterion",
    }
}

/// Runs one criterion by number.
pub fn run(id: u8) -> CriterionResult {
    let start = Instant::now();
    let tally = match id {
        1 => algebra::jacobi_exactness(),
        2 => algebra::branch_correctness(),
        3 => algebra::upper_half_plane(),
        4 => algebra::classifier_equivalences(),
        5 => dynamics::energy_conservation(),
        6 => dynamics::decay_condition_c(),
        7 => dynamics::decay_condition_c0(),
        8 => dynamics::halfline_bound(),
        9 => dynamics::resonance_limits(),
        10 => dynamics::cross_representation(),
        _ => {
            let mut t = Tally::new();
            t.check(false, format!("no criterion numbered {id}"));
            t
        }
    };
    CriterionResult {
        id,
        title: title(id),
        passed: tally.passed,
        details: tally.details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionResult> {
    IDS.iter().map(|&id| run(id)).collect()
}
