//! The tridiagonal symbol `D̃(ω)` of the defect block, its minor ladders,
//! pivots and closed-form inverse.
//!
//! Row `n` of the block has diagonal `d_n = μ_n − m_n ω² + γ_n + γ_{n−1}`,
//! where the outer couplings are replaced by the bulk boundary terms
//! `γ_∓(1 − e^{iθ_∓(ω)})`, and off-diagonal `−γ_n`.

use crate::chain::{BulkSide, Chain};
use crate::dispersion::{theta, Approach};
use crate::error::NumericError;
use num_complex::Complex64;

/// Relative size of `|det|` below which a frame counts as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// How the bulk factors `e^{iθ_±}` are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameMode {
    /// From the dispersion branch at the given point.
    Analytic(Approach),
    /// `ω = κ` with `e^{iθ} := 1`; needs equal bulks.
    AtKappa,
    /// `ω = a` with `e^{iθ} := −1`; needs equal bulks.
    AtA,
}

/// Complex symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal entries `−γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalFrame {
    pub omega: Complex64,
    pub mode: FrameMode,
    pub diag: Vec<Complex64>,
    pub couplings: Vec<f64>,
}

impl TridiagonalFrame {
    /// Builds a frame directly from its entries.
    pub fn from_entries(diag: Vec<Complex64>, couplings: Vec<f64>) -> Self {
        assert_eq!(diag.len(), couplings.len() + 1, "a frame of size n has n - 1 couplings");
        Self { omega: Complex64::new(f64::NAN, f64::NAN), mode: FrameMode::AtKappa, diag, couplings }
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Matrix entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => Complex64::new(-self.couplings[i.min(j)], 0.0),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// `Π max(1, |d_n|)`, the gauge for singularity tests.
    pub fn scale(&self) -> f64 {
        self.diag.iter().map(|d| d.norm().max(1.0)).product()
    }

    pub fn conj(&self) -> Self {
        let mode = match self.mode {
            FrameMode::Analytic(at) => FrameMode::Analytic(at.conj()),
            m => m,
        };
        Self {
            omega: self.omega.conj(),
            mode,
            diag: self.diag.iter().map(|d| d.conj()).collect(),
            couplings: self.couplings.clone(),
        }
    }

    /// `α_N`, computed by the leading-minor recurrence.
    pub fn det(&self) -> Complex64 {
        MinorLadder::new(self).det()
    }

    /// `D̃ x` for a vector `x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y -= self.couplings[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y -= self.couplings[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

/// Boundary factor `γ(1 − z)` for one bulk.
fn boundary_term(chain: &Chain, side: BulkSide, mode: FrameMode) -> Result<(Complex64, Complex64), NumericError> {
    let bulk = chain.bulk(side);
    let (omega, z) = match mode {
        FrameMode::Analytic(at) => (at.omega(), theta(bulk, at)?.z),
        FrameMode::AtKappa => (Complex64::new(bulk.kappa(), 0.0), Complex64::new(1.0, 0.0)),
        FrameMode::AtA => (Complex64::new(bulk.a(), 0.0), Complex64::new(-1.0, 0.0)),
    };
    Ok((omega, bulk.coupling * (1.0 - z)))
}

/// Assembles `D̃(ω)` for the chain's defect block.
pub fn assemble_frame(chain: &Chain, mode: FrameMode) -> Result<TridiagonalFrame, NumericError> {
    if !matches!(mode, FrameMode::Analytic(_)) && !chain.has_uniform_bulk() {
        return Err(NumericError::NonUniformBulk);
    }
    let (omega, left) = boundary_term(chain, BulkSide::Minus, mode)?;
    let (_, right) = boundary_term(chain, BulkSide::Plus, mode)?;
    let n = chain.n();
    let w2 = omega * omega;
    let mut diag: Vec<Complex64> =
        chain.defects.iter().map(|d| Complex64::new(d.pinning, 0.0) - d.mass * w2).collect();
    for (i, d) in diag.iter_mut().enumerate() {
        if i > 0 {
            *d += chain.couplings[i - 1];
        }
        if i < n {
            *d += chain.couplings[i];
        }
    }
    diag[0] += left;
    diag[n] += right;
    Ok(TridiagonalFrame { omega, mode, diag, couplings: chain.couplings.clone() })
}

/// Leading minors `α_{−1} … α_N` and trailing minors `β_0 … β_{N+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorLadder {
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
}

impl MinorLadder {
    pub fn new(frame: &TridiagonalFrame) -> Self {
        Self { alpha: leading_minors(frame), beta: trailing_minors(frame) }
    }

    /// `α_i` for `−2 ≤ i ≤ N`.
    pub fn alpha(&self, i: isize) -> Complex64 {
        if i == -2 { Complex64::new(0.0, 0.0) } else { self.alpha[(i + 1) as usize] }
    }

    /// `β_i` for `0 ≤ i ≤ N + 2`.
    pub fn beta(&self, i: usize) -> Complex64 {
        self.beta.get(i).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn det(&self) -> Complex64 {
        *self.alpha.last().unwrap()
    }
}

/// `α_{−1}, α_0, …, α_N` from `α_i = d_i α_{i−1} − γ_{i−1}² α_{i−2}`.
pub fn leading_minors(frame: &TridiagonalFrame) -> Vec<Complex64> {
    let mut alpha = Vec::with_capacity(frame.size() + 1);
    alpha.push(Complex64::new(1.0, 0.0));
    let mut prev2 = Complex64::new(0.0, 0.0);
    for (i, d) in frame.diag.iter().enumerate() {
        let prev = *alpha.last().unwrap();
        let g2 = if i > 0 { frame.couplings[i - 1].powi(2) } else { 0.0 };
        alpha.push(d * prev - g2 * prev2);
        prev2 = prev;
    }
    alpha
}

/// `β_0, …, β_N, β_{N+1}` from `β_i = d_i β_{i+1} − γ_i² β_{i+2}`.
pub fn trailing_minors(frame: &TridiagonalFrame) -> Vec<Complex64> {
    let n = frame.size();
    let mut beta = vec![Complex64::new(0.0, 0.0); n + 1];
    beta[n] = Complex64::new(1.0, 0.0);
    let mut next2 = Complex64::new(0.0, 0.0);
    for i in (0..n).rev() {
        let g2 = if i + 1 < n { frame.couplings[i].powi(2) } else { 0.0 };
        beta[i] = frame.diag[i] * beta[i + 1] - g2 * next2;
        next2 = beta[i + 1];
    }
    beta
}

/// Forward pivots `c_n` and backward pivots `e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pivots {
    pub forward: Vec<Complex64>,
    pub backward: Vec<Complex64>,
}

pub fn pivots(frame: &TridiagonalFrame) -> Result<Pivots, NumericError> {
    let n = frame.size();
    let mut forward = Vec::with_capacity(n);
    for i in 0..n {
        let c = if i == 0 {
            frame.diag[0]
        } else {
            let prev: Complex64 = forward[i - 1];
            if prev == Complex64::new(0.0, 0.0) {
                return Err(NumericError::ZeroPivot { index: i - 1, direction: "forward" });
            }
            frame.diag[i] - frame.couplings[i - 1].powi(2) / prev
        };
        forward.push(c);
    }
    let mut backward = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        backward[i] = if i + 1 == n {
            frame.diag[i]
        } else {
            let next = backward[i + 1];
            if next == Complex64::new(0.0, 0.0) {
                return Err(NumericError::ZeroPivot { index: i + 1, direction: "backward" });
            }
            frame.diag[i] - frame.couplings[i].powi(2) / next
        };
    }
    Ok(Pivots { forward, backward })
}

/// Determinant `Δ_k^j` of rows and columns `j..=k`, for `1 ≤ j ≤ k ≤ N − 1`.
/// The empty block `k = j − 1` gives 1 and `k = j − 2` gives 0, matching the
/// usual recurrence seeds.
pub fn inner_minor(frame: &TridiagonalFrame, j: usize, k: usize) -> Result<Complex64, NumericError> {
    let n = frame.size() - 1;
    if n < 2 || j < 1 || j > n - 1 || k > n - 1 || k + 2 < j {
        return Err(NumericError::MinorRange { j, k, n });
    }
    if k + 2 == j {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut prev2 = Complex64::new(0.0, 0.0);
    let mut prev = Complex64::new(1.0, 0.0);
    for i in j..=k {
        let g2 = if i > j { frame.couplings[i - 1].powi(2) } else { 0.0 };
        let cur = frame.diag[i] * prev - g2 * prev2;
        prev2 = prev;
        prev = cur;
    }
    Ok(prev)
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    pub size: usize,
    pub entries: Vec<Complex64>,
}

impl SquareMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.size + j]
    }
}

/// Closed-form inverse `Ñ = D̃^{−1}` built from the minor ladders.
pub fn invert_usmani(frame: &TridiagonalFrame) -> Result<SquareMatrix, NumericError> {
    let det = MinorLadder::new(frame).det();
    if det.norm() < SINGULAR_TOLERANCE * frame.scale() {
        return Err(NumericError::Singular { det: det.norm() });
    }
    Ok(invert_unchecked(frame))
}

/// The same formula without the singularity gate, for callers that approach
/// a pole on purpose. Entries are infinite or NaN at an exact zero of `det`.
pub fn invert_unchecked(frame: &TridiagonalFrame) -> SquareMatrix {
    let ladder = MinorLadder::new(frame);
    let det = ladder.det();
    let n = frame.size();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let mut prod = 1.0;
        for j in (0..=i).rev() {
            if j < i {
                prod *= frame.couplings[j];
            }
            let v = prod * ladder.alpha(j as isize - 1) * ladder.beta(i + 1) / det;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    SquareMatrix { size: n, entries }
}

/// Number of negative eigenvalues of a real symmetric frame, by Sylvester's
/// law applied to the forward pivots. A zero pivot is nudged to a tiny
/// positive value, which moves a zero eigenvalue to the nonnegative count.
pub fn negative_count(frame: &TridiagonalFrame) -> usize {
    let tiny = f64::EPSILON * frame.scale().powf(1.0 / frame.size() as f64);
    let mut count = 0;
    let mut prev = 1.0_f64;
    for i in 0..frame.size() {
        let g2 = if i > 0 { frame.couplings[i - 1].powi(2) } else { 0.0 };
        let mut c = frame.diag[i].re - g2 / prev;
        if c == 0.0 {
            c = tiny;
        }
        if c < 0.0 {
            count += 1;
        }
        prev = c;
    }
    count
}
