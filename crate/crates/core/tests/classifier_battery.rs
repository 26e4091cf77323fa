mod common;

use common::*;
use defect_chain::chain::{Bulk, BulkSide, Chain, DefectSite};
use defect_chain::classifier::*;
use defect_chain::config::bundled;
use defect_chain::dispersion::Approach;
use defect_chain::jacobi::{assemble_frame, leading_minors, pivots, FrameMode};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `z` on the upper side of the real axis from the companion oracle.
fn z_above(b: &Bulk, w: f64) -> Complex64 {
    if w == b.kappa() {
        return c(1.0, 0.0);
    }
    if w == b.a() {
        return c(-1.0, 0.0);
    }
    z_by_companion(b.nu_sq(), b.kappa_sq(), c(w, 1e-13 * w.abs().max(1.0)))
}

/// Scalar symbol of a single-site chain, built without the library branch.
fn symbol_n0(chain: &Chain, w: f64) -> Complex64 {
    let d = chain.defects[0];
    let (l, r) = (&chain.bulk_minus, &chain.bulk_plus);
    c(d.pinning - d.mass * w * w, 0.0) + l.coupling * (1.0 - z_above(l, w)) + r.coupling * (1.0 - z_above(r, w))
}

fn oracle_gaps(chain: &Chain) -> Vec<(f64, f64)> {
    let top = omega_search_max(chain);
    let mut cuts: Vec<(f64, f64)> = vec![chain.bulk_minus.band(), chain.bulk_plus.band()];
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = Vec::new();
    let mut lo = 0.0f64;
    for (k, a) in cuts {
        if k > lo {
            out.push((lo, k));
        }
        lo = lo.max(a);
    }
    out.push((lo, top));
    out
}

/// Brute-force verdict for one defect site: dense sign scan in the gaps
/// and direct evaluation at the band edges.
fn oracle_n0(chain: &Chain) -> VerdictKind {
    let scale = |w: f64| 1.0 + chain.defects[0].mass * w * w + 4.0 * (chain.bulk_minus.coupling + chain.bulk_plus.coupling);
    let vanishes = |w: f64| symbol_n0(chain, w).norm() <= 1e-8 * scale(w);
    if chain.bulk_minus.kappa() == 0.0 && chain.bulk_plus.kappa() == 0.0 && chain.defects[0].pinning == 0.0 {
        return VerdictKind::ZeroMode;
    }
    for (lo, hi) in oracle_gaps(chain) {
        // Uniform points plus geometric clusters at both ends, where the
        // symbol moves like a square root.
        let mut xs: Vec<f64> = (1..2000).map(|i| i as f64 / 2000.0).collect();
        for k in 0..60 {
            let x = 10f64.powf(-12.0 + k as f64 * 0.15);
            xs.push(x);
            xs.push(1.0 - x);
        }
        xs.sort_by(f64::total_cmp);
        let pts: Vec<f64> = xs.iter().map(|x| lo + (hi - lo) * x).collect();
        let vals: Vec<f64> = pts.iter().map(|w| symbol_n0(chain, *w).re).collect();
        if vals.windows(2).any(|p| p[0].signum() != p[1].signum()) {
            return VerdictKind::RealZero;
        }
    }
    let edges = [chain.bulk_minus.kappa(), chain.bulk_minus.a(), chain.bulk_plus.kappa(), chain.bulk_plus.a()];
    if edges.iter().any(|e| *e > 0.0 && vanishes(*e)) {
        return VerdictKind::C0;
    }
    VerdictKind::C
}

fn random_p1(r: &mut ChaCha8Rng) -> Chain {
    let pinned = r.gen_bool(0.6);
    let b = random_bulk(r, pinned);
    let mu0 = if r.gen_bool(0.9) { r.gen_range(0.0..4.0) } else { 0.0 };
    Chain::single(b, b, r.gen_range(0.2..3.0), mu0).unwrap()
}

fn random_p2(r: &mut ChaCha8Rng) -> Chain {
    let side = |r: &mut ChaCha8Rng| {
        let mu = if r.gen_bool(0.5) { r.gen_range(0.0..2.0) } else { 0.0 };
        Bulk::new(1.0, r.gen_range(0.2..3.0), mu)
    };
    let (l, p) = (side(r), side(r));
    Chain::single(l, p, 1.0, r.gen_range(0.0..5.0)).unwrap()
}

fn random_p3(r: &mut ChaCha8Rng) -> Chain {
    let l = Bulk::new(r.gen_range(0.2..3.0), r.gen_range(0.2..3.0), 0.0);
    let p = Bulk::new(r.gen_range(0.2..3.0), r.gen_range(0.2..3.0), 0.0);
    Chain::single(l, p, r.gen_range(0.2..3.0), r.gen_range(0.01..5.0)).unwrap()
}

fn pattern_battery(make: fn(&mut ChaCha8Rng) -> Chain, form: fn(&Chain) -> Option<VerdictKind>, seed: u64) {
    let mut r = rng(seed);
    let mut seen = std::collections::HashMap::new();
    for _ in 0..500 {
        let chain = make(&mut r);
        let special = form(&chain).expect("pattern matches");
        let general = classify_n0(&chain).kind();
        assert_eq!(special, general, "{chain:?}");
        assert_eq!(general, oracle_n0(&chain), "{chain:?}");
        *seen.entry(general).or_insert(0) += 1;
    }
    assert!(seen.len() >= 2, "battery only produced {seen:?}");
}

#[test]
fn p1_form_matches_general_and_oracle() {
    pattern_battery(random_p1, classify_p1, 11);
}

#[test]
fn p2_form_matches_general_and_oracle() {
    pattern_battery(random_p2, classify_p2, 12);
}

#[test]
fn p3_form_matches_general_and_oracle() {
    pattern_battery(random_p3, classify_p3, 13);
}

#[test]
fn documented_single_site_verdicts() {
    let b = Bulk::new(1.0, 1.0, 0.0);
    let v = classify(&Chain::single(b, b, 2.0, 1.0).unwrap()).unwrap();
    assert_eq!(v.regime, Regime::C);
    assert_eq!(v.decay_beta(), Some(3));
    assert!(!v.trail.is_empty());
    let v = classify(&Chain::single(b, b, 1.0, 0.0).unwrap()).unwrap();
    assert_eq!(v.resonance(), Some(ResonanceKind::ZeroMode));

    // Unpinned bulks with different sound speeds and a weak pinning.
    let (l, p) = (Bulk::new(1.0, 1.0, 0.0), Bulk::new(1.0, 2.0, 0.0));
    let limit = 2.0 * 2f64.sqrt() * (2.0f64 - 1.0).sqrt();
    for mu0 in [0.1 * limit, 0.5 * limit, 0.95 * limit] {
        let chain = Chain::single(l, p, 1.0, mu0).unwrap();
        assert_eq!(classify_p2(&chain), Some(VerdictKind::C));
        assert_eq!(classify(&chain).unwrap().kind(), VerdictKind::C);
    }

    // Exact equality at the upper edge with the κ inequality strict.
    let (m, g, mu, m0) = (1.0, 1.0, 0.0, 2.0);
    let mu0 = m0 * (mu / m - 4.0 * g * (1.0 / m0 - 1.0 / m));
    let b = Bulk::new(m, g, mu);
    let v = classify(&Chain::single(b, b, m0, mu0).unwrap()).unwrap();
    assert_eq!(v.kind(), VerdictKind::C0, "{}", v.report());
    assert!((v.c0_witness().unwrap() - b.a()).abs() < 1e-12);
    assert_eq!(oracle_n0(&Chain::single(b, b, m0, mu0).unwrap()), VerdictKind::C0);
}

#[test]
fn bundled_chains_have_their_names() {
    let expect = [
        ("p1_c", VerdictKind::C),
        ("p1_c0_i", VerdictKind::C0),
        ("p1_c0_ii", VerdictKind::C0),
        ("p1_c0_iii", VerdictKind::C0),
        ("p2_c", VerdictKind::C),
        ("p3_c", VerdictKind::C),
        ("r1", VerdictKind::ZeroMode),
        ("r2", VerdictKind::RealZero),
        ("r3", VerdictKind::RealZero),
        ("n2_uniform", VerdictKind::C),
    ];
    for (name, kind) in expect {
        let chain = bundled(name).unwrap().chain;
        let v = classify(&chain).unwrap();
        assert_eq!(v.kind(), kind, "{name}: {}", v.report());
        if chain.n() == 0 {
            assert_eq!(oracle_n0(&chain), kind, "{name}");
        }
    }
}

#[test]
fn k_function_landmarks() {
    let chain = Chain::single(Bulk::new(1.0, 1.0, 1.0), Bulk::new(2.0, 0.5, 3.0), 1.0, 1.0).unwrap();
    let kbar2 = 0.5 * (chain.bulk_minus.kappa_sq() + chain.bulk_plus.kappa_sq());
    let p = chain.bulk_plus;
    assert!((k0(&chain, p.kappa()).unwrap() - kbar2).abs() < 1e-12);
    assert!((k0(&chain, 0.0).unwrap() - (kbar2 - 0.5 * p.kappa() * p.a())).abs() < 1e-12);
    for side in [BulkSide::Minus, BulkSide::Plus] {
        assert!((k_side(&chain, side, chain.bulk(side).a()).unwrap() - kbar2).abs() < 1e-12);
    }
    let err = k0(&chain, 1.1 * p.kappa()).unwrap_err().to_string();
    assert!(err.contains("K0"), "{err}");
    assert!(k_side(&chain, BulkSide::Plus, 0.5 * p.a()).is_err());
    let all = k_functions(&chain, 0.0);
    assert!(all.k0.is_some() && all.k_minus.is_none() && all.k_plus.is_none());
}

/// `(−1)^n`-adjusted sign test of dense leading minors.
fn minors_dense(m: &DMatrix<f64>) -> Vec<f64> {
    (1..=m.nrows()).map(|k| m.view((0, 0), (k, k)).into_owned().determinant()).collect()
}

fn dense_at_edge(chain: &Chain, at_a: bool) -> DMatrix<f64> {
    let b = chain.bulk_minus;
    let (w, z) = if at_a { (b.a(), -1.0) } else { (b.kappa(), 1.0) };
    let n = chain.n();
    DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j {
            let d = chain.defects[i];
            let mut v = d.pinning - d.mass * w * w;
            v += if i == 0 { b.coupling * (1.0 - z) } else { chain.couplings[i - 1] };
            v += if i == n { b.coupling * (1.0 - z) } else { chain.couplings[i] };
            v
        } else if i.abs_diff(j) == 1 {
            -chain.couplings[i.min(j)]
        } else {
            0.0
        }
    })
}

struct Assertions {
    a2: bool,
    a3: bool,
    a6: bool,
}

/// The three assertions at one edge, each from its own definition. `sign`
/// is −1 at the upper edge (negative definite) and +1 at the lower one.
fn assertions(chain: &Chain, at_a: bool) -> Assertions {
    let b = chain.bulk_minus;
    let grid: Vec<f64> = if at_a {
        let top = omega_search_max(chain);
        (1..=600).map(|i| b.a() + (top - b.a()) * (i as f64 / 600.0).powi(2)).collect()
    } else {
        (0..600).map(|i| b.kappa() * (1.0 - (i as f64 / 600.0).powi(2).max(1e-6))).rev().collect()
    };
    let want = |n: usize, x: f64| if at_a { x * (-1f64).powi(n as i32) < 0.0 } else { x > 0.0 };
    let size = chain.n() + 1;
    let a2 = grid.iter().all(|w| want(size - 1, oracle_real_frame(chain, *w).determinant()));
    let a3 = grid.iter().all(|w| minors_dense(&oracle_real_frame(chain, *w)).iter().enumerate().all(|(n, x)| want(n, *x)));
    let edge = minors_dense(&dense_at_edge(chain, at_a));
    let tol = 1e-9 * edge.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let a6 = edge.iter().enumerate().all(|(n, x)| {
        if n + 1 < size { want(n, *x) } else { want(n, *x) || x.abs() <= tol }
    });
    Assertions { a2, a3, a6 }
}

#[test]
fn edge_assertion_sets_agree_on_random_chains() {
    let mut r = rng(21);
    let mut counts = [0usize; 2];
    for i in 0..200 {
        let n = 1 + i % 4;
        let chain = random_uniform_chain(&mut r, n);
        let at_a = assertions(&chain, true);
        assert_eq!(at_a.a2, at_a.a3, "upper edge {chain:?}");
        assert_eq!(at_a.a2, at_a.a6, "upper edge {chain:?}");
        let pinned = chain.bulk_minus.pinning > 0.0;
        let mut lower_ok = true;
        if pinned {
            let at_k = assertions(&chain, false);
            assert_eq!(at_k.a2, at_k.a3, "lower edge {chain:?}");
            assert_eq!(at_k.a2, at_k.a6, "lower edge {chain:?}");
            lower_ok = at_k.a2;
        }
        let verdict = classify(&chain).unwrap();
        let expect_ok = at_a.a2 && lower_ok && !chain.all_pinning_zero();
        let got_ok = matches!(verdict.kind(), VerdictKind::C | VerdictKind::C0);
        assert_eq!(expect_ok, got_ok, "{chain:?}\n{}", verdict.report());
        counts[got_ok as usize] += 1;
        if got_ok {
            let m = chain.bulk_minus.mass;
            assert!(chain.defects[0].mass > m / 2.0 && chain.defects[n].mass > m / 2.0);
            assert!(find_spectral_zero(&chain).is_none());
            let (da, dk) = (dense_at_edge(&chain, true), dense_at_edge(&chain, false));
            for k in 0..=n {
                assert!(da[(k, k)] <= 0.0);
                if pinned {
                    assert!(dk[(k, k)] >= 0.0);
                }
            }
        }
    }
    assert!(counts[0] > 10 && counts[1] > 10, "{counts:?}");
}

#[test]
fn minor_ladders_match_dense_definiteness() {
    let mut r = rng(22);
    for i in 0..200 {
        let chain = random_uniform_chain(&mut r, 1 + i % 5);
        for (mode, at_a) in [(FrameMode::AtA, true), (FrameMode::AtKappa, false)] {
            let frame = assemble_frame(&chain, mode).unwrap();
            let minors = leading_minors(&frame);
            let dense = dense_at_edge(&chain, at_a);
            for (k, x) in minors_dense(&dense).iter().enumerate() {
                assert!((minors[k + 1].re - x).abs() <= 1e-10 * x.abs().max(1.0), "{k}");
            }
            let eig = dense.clone().symmetric_eigen().eigenvalues;
            let definite_by_minors = minors[1..]
                .iter()
                .enumerate()
                .all(|(n, x)| if at_a { x.re * (-1f64).powi(n as i32) < 0.0 } else { x.re > 0.0 });
            let definite_by_eig = eig.iter().all(|e| if at_a { *e < 0.0 } else { *e > 0.0 });
            assert_eq!(definite_by_minors, definite_by_eig);
        }
    }
}

#[test]
fn pivots_positive_at_zero_frequency_when_pinned() {
    let mut r = rng(23);
    let mut tried = 0;
    while tried < 200 {
        let chain = random_uniform_chain(&mut r, 1 + tried % 6);
        if chain.bulk_minus.pinning == 0.0 {
            continue;
        }
        tried += 1;
        let frame = assemble_frame(&chain, FrameMode::Analytic(Approach::Above(0.0))).unwrap();
        let p = pivots(&frame).unwrap();
        assert!(p.forward.iter().all(|x| x.re > 0.0 && x.im.abs() < 1e-12));
        assert!(leading_minors(&frame)[1..].iter().all(|x| x.re > 0.0));
    }
}

#[test]
fn real_zero_verdicts_carry_a_root() {
    let mut r = rng(24);
    let mut found = 0;
    for i in 0..300 {
        let chain = if i % 2 == 0 { random_p1(&mut r) } else { random_uniform_chain(&mut r, 1 + i % 3) };
        let v = classify(&chain).unwrap();
        match v.resonance() {
            Some(ResonanceKind::RealZero { omega_star }) => {
                found += 1;
                let m = oracle_real_frame(&chain, omega_star);
                let eig = m.clone().symmetric_eigen().eigenvalues;
                let small = eig.iter().fold(f64::INFINITY, |s, e| s.min(e.abs()));
                assert!(small < 1e-8 * m.norm().max(1.0), "{small} at {omega_star}");
                let b = chain.bulk_minus;
                let th = defect_chain::dispersion::theta(&b, Approach::Above(omega_star)).unwrap().theta;
                assert!(th.im > 0.0);
                if omega_star > b.a() {
                    assert!((th.re.abs() - std::f64::consts::PI).abs() < 1e-12);
                } else {
                    assert!(th.re.abs() < 1e-12);
                }
            }
            _ => {
                if v.kind() == VerdictKind::C {
                    assert!(find_spectral_zero(&chain).is_none());
                }
            }
        }
    }
    assert!(found > 20, "{found}");
}

#[test]
fn light_defect_has_zero_above_band() {
    let b = Bulk::new(1.0, 1.0, 1.0);
    let chain = Chain::single(b, b, 0.4, 0.5).unwrap();
    let w = find_spectral_zero(&chain).unwrap();
    assert!(w > b.a());
    assert!(symbol_n0(&chain, w).norm() < 1e-10);
}

#[test]
fn two_site_examples() {
    let b = Bulk::new(1.0, 1.0, 0.0);
    let site = DefectSite { mass: 2.0, pinning: 2.0 };
    let chain = Chain::uniform(b, vec![site, site], vec![1.0]).unwrap();
    let v = classify(&chain).unwrap();
    let eig = dense_at_edge(&chain, true).symmetric_eigen().eigenvalues;
    assert_eq!(v.kind() == VerdictKind::C, eig.iter().all(|e| *e < 0.0), "{}", v.report());
    let free = DefectSite { mass: 2.0, pinning: 0.0 };
    let v = classify(&Chain::uniform(b, vec![free, free], vec![1.0]).unwrap()).unwrap();
    assert_eq!(v.resonance(), Some(ResonanceKind::ZeroMode));
}

#[test]
fn general_route_refuses_different_bulks() {
    let d = DefectSite { mass: 1.0, pinning: 1.0 };
    let chain = Chain::new(Bulk::new(1.0, 1.0, 0.0), Bulk::new(2.0, 1.0, 0.0), vec![d, d], vec![1.0]).unwrap();
    assert!(matches!(classify(&chain), Err(defect_chain::error::NumericError::Unsupported(_))));
}
