//! Reference computations built from nalgebra and first principles.

use defect_chain::chain::{Bulk, Chain, DefectSite};
use defect_chain::jacobi::TridiagonalFrame;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn random_frame(rng: &mut ChaCha8Rng, size: usize) -> TridiagonalFrame {
    let diag = (0..size).map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
    let couplings = (0..size.saturating_sub(1)).map(|_| rng.gen_range(0.2..2.0)).collect();
    TridiagonalFrame::from_entries(diag, couplings)
}

pub fn dense(frame: &TridiagonalFrame) -> DMatrix<Complex64> {
    let n = frame.size();
    DMatrix::from_fn(n, n, |i, j| frame.entry(i, j))
}

/// Determinant of rows and columns `lo..=hi` by LU; 1 for an empty block.
pub fn block_det(m: &DMatrix<Complex64>, lo: usize, hi: usize) -> Complex64 {
    if hi < lo {
        return c(1.0, 0.0);
    }
    m.view((lo, lo), (hi - lo + 1, hi - lo + 1)).into_owned().determinant()
}

pub fn random_bulk(rng: &mut ChaCha8Rng, pinned: bool) -> Bulk {
    let mu = if pinned { rng.gen_range(0.1..2.0) } else { 0.0 };
    Bulk::new(rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0), mu)
}

pub fn random_uniform_chain(rng: &mut ChaCha8Rng, n: usize) -> Chain {
    let pinned = rng.gen_bool(0.6);
    let bulk = random_bulk(rng, pinned);
    let defects = (0..=n)
        .map(|_| DefectSite {
            mass: rng.gen_range(0.3..3.0) * bulk.mass,
            pinning: if rng.gen_bool(0.8) { rng.gen_range(0.0..3.0) } else { 0.0 },
        })
        .collect();
    let couplings = (0..n).map(|_| rng.gen_range(0.3..3.0)).collect();
    Chain::uniform(bulk, defects, couplings).expect("valid random chain")
}

/// Root of `z² − b z + 1` with `|z| < 1`, from the companion eigenvalues.
pub fn z_by_companion(nu_sq: f64, kappa_sq: f64, omega: Complex64) -> Complex64 {
    let b = 2.0 + (kappa_sq - omega * omega) / nu_sq;
    let m = DMatrix::from_row_slice(2, 2, &[b, c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let ev = m.eigenvalues().expect("2x2 companion");
    if ev[0].norm() < ev[1].norm() {
        ev[0]
    } else {
        ev[1]
    }
}

/// Real symbol at a real gap frequency, or at a band edge of the uniform
/// bulk where `z = ±1` exactly.
pub fn real_symbol(chain: &Chain, omega: f64, edge_z: Option<f64>) -> DMatrix<f64> {
    let n = chain.n();
    let z = |b: &Bulk| edge_z.unwrap_or_else(|| z_by_companion(b.nu_sq(), b.kappa_sq(), c(omega, 0.0)).re);
    let (zl, zr) = (z(&chain.bulk_minus), z(&chain.bulk_plus));
    DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j {
            let d = &chain.defects[i];
            let mut v = d.pinning - d.mass * omega * omega;
            v += if i == 0 { chain.bulk_minus.coupling * (1.0 - zl) } else { chain.couplings[i - 1] };
            v += if i == n { chain.bulk_plus.coupling * (1.0 - zr) } else { chain.couplings[i] };
            v
        } else if i.abs_diff(j) == 1 {
            -chain.couplings[i.min(j)]
        } else {
            0.0
        }
    })
}

pub fn leading_dets(m: &DMatrix<f64>) -> Vec<f64> {
    (1..=m.nrows()).map(|k| m.view((0, 0), (k, k)).into_owned().determinant()).collect()
}

/// Largest `|x|` over samples with `t0 ≤ t ≤ t1`.
pub fn window_max(times: &[f64], values: &[f64], t0: f64, t1: f64) -> f64 {
    times.iter().zip(values).filter(|(t, _)| **t >= t0 && **t <= t1).map(|(_, x)| x.abs()).fold(0.0, f64::max)
}
