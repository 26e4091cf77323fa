mod common;

use common::*;
use defect_chain::chain::Bulk;
use defect_chain::dispersion::*;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn residual(bulk: &Bulk, th: Complex64, w: Complex64) -> f64 {
    (bulk.nu_sq() * (2.0 - 2.0 * th.cos()) + bulk.kappa_sq() - w * w).norm()
}

#[test]
fn phi_landmarks() {
    let b = Bulk::new(2.0, 3.0, 0.5);
    assert!((phi(&b, 0.0) - b.kappa()).abs() < 1e-15);
    assert!((phi(&b, PI) - b.a()).abs() < 1e-15);
    assert!((phi(&Bulk::new(1.0, 1.0, 0.0), PI / 2.0) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn documented_values() {
    let b = Bulk::new(1.0, 1.0, 1.0);
    let z = theta(&b, Approach::Interior(c(0.0, 0.0))).unwrap().z;
    // e^{iθ(0)} = 4 (κ/ν + sqrt(4 + κ²/ν²))^{−2}.
    assert!((z.re - 4.0 / (1.0 + 5f64.sqrt()).powi(2)).abs() < 1e-15);
    assert!((z.re - 0.381966).abs() < 1e-6);
    let free = Bulk::new(1.0, 1.0, 0.0);
    let th = theta(&free, Approach::Above(2f64.sqrt())).unwrap().theta;
    assert!((th - c(PI / 2.0, 0.0)).norm() < 1e-15);
    let far = theta(&free, Approach::Interior(c(0.0, 10.0))).unwrap().z;
    assert!(far.norm() < 0.02);
    assert!((far - z_by_companion(1.0, 0.0, c(0.0, 10.0))).norm() < 1e-14);
}

fn bulk_strategy() -> impl Strategy<Value = Bulk> {
    (0.2f64..5.0, 0.2f64..5.0, prop_oneof![Just(0.0), 0.0f64..4.0]).prop_map(|(m, g, mu)| Bulk::new(m, g, mu))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn interior_branch(b in bulk_strategy(), re in -8.0f64..8.0, im in prop_oneof![1e-6f64..1e-2, 1e-2f64..8.0], lower in any::<bool>()) {
        let w = if lower { c(re, -im) } else { c(re, im) };
        let br = theta(&b, Approach::Interior(w)).unwrap();
        prop_assert!(residual(&b, br.theta, w) < 1e-12 * w.norm_sqr().max(1.0));
        prop_assert!(br.theta.im > 0.0);
        prop_assert!(br.theta.re > -PI && br.theta.re <= PI);
        prop_assert!((br.z - z_by_companion(b.nu_sq(), b.kappa_sq(), w)).norm() < 1e-10);
        let conj = theta(&b, Approach::Interior(w.conj())).unwrap();
        prop_assert!((conj.theta + br.theta.conj()).norm() < 1e-12 * br.theta.norm().max(1.0));
    }

    #[test]
    fn cut_sign_rule(b in bulk_strategy(), s in 0.001f64..0.999, neg in any::<bool>()) {
        let (k, a) = b.band();
        let mut w = k + s * (a - k);
        if neg { w = -w; }
        let up = theta(&b, Approach::Above(w)).unwrap();
        prop_assert!(up.theta.im.abs() < 1e-12);
        prop_assert_eq!(up.theta.re.sin().signum(), w.signum());
        prop_assert!(residual(&b, up.theta, c(w, 0.0)) < 1e-12 * (w * w).max(1.0));
        for eps in [1e-3, 1e-5, 1e-7] {
            let near = theta(&b, Approach::Interior(c(w, eps))).unwrap();
            prop_assert!((near.z - up.z).norm() < 50.0 * eps / b.nu() / (s * (1.0 - s)).sqrt().min(1.0) + 1e-9);
        }
    }

    #[test]
    fn path_continuity(b in bulk_strategy(), r in 0.1f64..6.0) {
        // A semicircle in the upper half plane never crosses the cut.
        let lift = c(0.0, 0.05);
        let mut prev = theta(&b, Approach::Interior(c(r, 0.0) + lift)).unwrap().z;
        for i in 1..=2000 {
            let phase = PI * i as f64 / 2000.0;
            let w = Complex64::from_polar(r, phase) + lift;
            let z = theta(&b, Approach::Interior(w)).unwrap().z;
            prop_assert!((z - prev).norm() < 0.2);
            prev = z;
        }
    }
}

#[test]
fn grid_of_ten_thousand() {
    let bulks = [Bulk::new(1.0, 1.0, 0.0), Bulk::new(2.0, 0.5, 1.0), Bulk::new(0.5, 3.0, 0.2), Bulk::new(1.5, 1.0, 4.0)];
    let mut worst: f64 = 0.0;
    for b in &bulks {
        for i in 0..50 {
            for j in 0..50 {
                let w = c(-3.0 * b.a() + 6.0 * b.a() * i as f64 / 49.0, -2.0 + 4.0 * (j as f64 + 0.5) / 50.0);
                let br = theta(b, Approach::Interior(w)).unwrap();
                assert!(br.theta.im > 0.0);
                worst = worst.max(residual(b, br.theta, w) / w.norm_sqr().max(1.0));
            }
        }
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn boundary_rejection_on_cut() {
    let b = Bulk::new(1.0, 1.0, 1.0);
    assert!(matches!(
        theta(&b, Approach::Interior(c(1.5, 0.0))),
        Err(defect_chain::error::NumericError::OnCut { .. })
    ));
    assert!(theta(&b, Approach::Interior(c(0.5, 0.0))).is_ok());
}

#[test]
fn decay_at_infinity() {
    let b = Bulk::new(1.0, 2.0, 0.5);
    let mag = |r: f64| theta(&b, Approach::Interior(c(0.3 * r, r))).unwrap().z.norm();
    for r in [40.0, 80.0, 160.0] {
        let ratio = mag(r) / mag(2.0 * r);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }
}

#[test]
fn edge_series_match_numerics() {
    for b in [Bulk::new(1.0, 1.0, 1.0), Bulk::new(2.0, 0.7, 0.3), Bulk::new(0.5, 2.0, 3.0)] {
        let (k, a) = b.band();
        for (edge, at) in [(Edge::Kappa, k), (Edge::A, a)] {
            let s = edge_series(&b, edge).unwrap();
            for dir in [c(1.0, 1.0), c(-1.0, 1.0)] {
                let w = c(at, 0.0) + 1e-4 * dir;
                let exact = theta(&b, Approach::Interior(w)).unwrap().z;
                assert!((s.evaluate(w, 3) - exact).norm() / exact.norm() < 1e-5, "{edge:?}");
            }
        }
    }
    let free = Bulk::new(1.3, 0.8, 0.0);
    let s = edge_series(&free, Edge::Zero).unwrap();
    let w = c(1e-4, 1e-4);
    let exact = theta(&free, Approach::Interior(w)).unwrap().z;
    assert!((s.evaluate(w, 3) - exact).norm() < 1e-5);
    assert!(edge_series(&Bulk::new(1.0, 1.0, 1.0), Edge::Zero).is_err());
}

#[test]
fn edge_series_coefficients() {
    let b = Bulk::new(1.0, 4.0, 0.0);
    let k = edge_series(&b, Edge::Kappa).unwrap();
    assert_eq!(&k.coefficients[..3], &[c(1.0, 0.0), c(0.0, 0.5), c(-0.125, 0.0)]);
    let a = edge_series(&b, Edge::A).unwrap();
    assert_eq!(a.coefficients[0], c(-1.0, 0.0));
    assert_eq!(a.coefficients[1], c(0.0, 0.5));
}
