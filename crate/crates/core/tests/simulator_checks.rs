mod common;

use defect_chain::chain::{Bulk, Chain, DefectSite, LatticeState};
use defect_chain::config::{bundled, default_initial};
use defect_chain::propagator::{kernel_n, GreenTable, PolePolicy};
use defect_chain::simulator::*;

fn options(horizon: f64, dt: f64, stride: usize) -> SimOptions {
    let mut o = SimOptions::new(horizon);
    o.dt = Some(dt);
    o.stride = stride;
    o
}

#[test]
fn zero_data_stays_zero() {
    let chain = bundled("p1_c").unwrap().chain;
    let traj = evolve(&chain, &LatticeState::zeros(-2, 2), &SimOptions::new(20.0)).unwrap();
    assert!(traj.block_u.iter().flatten().all(|x| *x == 0.0));
    assert!(traj.energy.iter().all(|e| *e == 0.0));
    assert!(traj.norm.iter().all(|e| *e == 0.0));
}

#[test]
fn energy_is_conserved_on_bundled_chains() {
    for name in ["p1_c", "p2_c", "r2", "n2_uniform"] {
        let cfg = bundled(name).unwrap();
        let traj = evolve(&cfg.chain, &cfg.initial_or_default(), &SimOptions::new(100.0)).unwrap();
        assert!(traj.energy_drift() < 1e-8, "{name}: {:e}", traj.energy_drift());
        assert!(traj.warnings.is_empty(), "{name}: {:?}", traj.warnings);
    }
}

#[test]
fn homogeneous_chain_matches_green_function() {
    let b = Bulk::new(1.3, 0.8, 0.4);
    let chain = Chain::uniform(b, vec![DefectSite { mass: b.mass, pinning: b.pinning }], vec![]).unwrap();
    let mut y0 = LatticeState::zeros(-3, 3);
    y0.set(2, 0.4, -0.1);
    y0.set(-1, 0.0, 0.3);
    let t = 15.0;
    let mut opts = options(t, 0.01, 100);
    opts.snapshots = vec![t];
    let traj = evolve(&chain, &y0, &opts).unwrap();
    let snap = traj.snapshot(t).unwrap();
    let table = GreenTable::new(&b, t, 40).unwrap();
    for n in -10..=10 {
        let (mut u, mut v) = (0.0, 0.0);
        for k in [2i64, -1] {
            let (du, dv) = table.get(n - k).apply(y0.u_at(k), y0.v_at(k));
            u += du;
            v += dv;
        }
        assert!((snap.u_at(n) - u).abs() < 1e-9 && (snap.v_at(n) - v).abs() < 1e-9, "site {n}");
    }
}

fn u0_at(chain: &Chain, y0: &LatticeState, dt: f64, integrator: Integrator) -> f64 {
    let mut o = options(4.0, dt, 1);
    o.integrator = integrator;
    let traj = evolve(chain, y0, &o).unwrap();
    *traj.block_series(0).last().unwrap()
}

#[test]
fn integrator_orders() {
    let cfg = bundled("p2_c").unwrap();
    let y0 = cfg.initial_or_default();
    let exact = u0_at(&cfg.chain, &y0, 0.0025, Integrator::Gauss4);
    let e = |dt, i| (u0_at(&cfg.chain, &y0, dt, i) - exact).abs();
    let verlet = e(0.04, Integrator::Verlet) / e(0.02, Integrator::Verlet);
    assert!((verlet - 4.0).abs() < 0.4, "verlet ratio {verlet}");
    let gauss = e(0.08, Integrator::Gauss4) / e(0.04, Integrator::Gauss4);
    assert!((gauss - 16.0).abs() < 2.0, "gauss ratio {gauss}");
}

#[test]
fn unstable_step_is_refused() {
    let chain = bundled("p1_c").unwrap().chain;
    let y0 = default_initial(&chain);
    let w = chain.omega_max_local();
    assert!(evolve(&chain, &y0, &options(1.0, 2.01 / w, 1)).is_err());
    assert!(evolve(&chain, &y0, &options(1.0, 1.9 / w, 1)).is_ok());
    let mut bad = SimOptions::new(-1.0);
    bad.dt = Some(0.1);
    assert!(evolve(&chain, &y0, &bad).is_err());
}

#[test]
fn short_window_warns() {
    let cfg = bundled("p1_c").unwrap();
    let mut o = SimOptions::new(60.0);
    o.reach = Some(10);
    let traj = evolve(&cfg.chain, &cfg.initial_or_default(), &o).unwrap();
    assert!(traj.valid_horizon < 60.0);
    assert!(!traj.warnings.is_empty());
    let full = evolve(&cfg.chain, &cfg.initial_or_default(), &SimOptions::new(60.0)).unwrap();
    assert!(full.valid_horizon >= 60.0);
}

#[test]
fn decomposition_splits_the_block() {
    let cfg = bundled("n2_uniform").unwrap();
    let y0 = cfg.initial_or_default();
    let traj = evolve(&cfg.chain, &y0, &options(20.0, 0.02, 5)).unwrap();
    let dec = decompose(&traj, &y0).unwrap();
    let n = cfg.chain.n() as i64;
    for site in 0..=n {
        // z vanishes on the block, so r equals u there.
        assert_eq!(dec.r_series(site), traj.block_series(site));
    }
    // At t = 0 the exterior field carries all exterior data.
    assert!((dec.z_minus[0].0 - y0.u_at(-1)).abs() < 1e-12);
    assert!((dec.z_minus[0].1 - y0.v_at(-1)).abs() < 1e-12);
    assert!((dec.z_plus[0].0 - y0.u_at(n + 1)).abs() < 1e-12);
    assert!(dec.r[0][0].abs() < 1e-12);
}

#[test]
fn block_equations_hold_for_the_remainder() {
    for name in ["p1_c", "n2_uniform", "r3"] {
        let cfg = bundled(name).unwrap();
        let y0 = cfg.initial_or_default();
        let traj = evolve(&cfg.chain, &y0, &options(30.0, 0.02, 1)).unwrap();
        let dec = decompose(&traj, &y0).unwrap();
        let res = block_residual(&cfg.chain, &dec);
        assert!(res < 1e-6, "{name}: {res:e}");
    }
}

#[test]
fn simpson_weights_integrate_cubics() {
    for count in [2usize, 3, 4, 5, 6, 11, 12] {
        let h = 0.3;
        let w = simpson_weights(count, h);
        let len = h * (count - 1) as f64;
        let f = |x: f64| if count == 2 { 2.0 * x + 1.0 } else { x * x * x - x + 2.0 };
        let exact = if count == 2 { len * len + len } else { len.powi(4) / 4.0 - len * len / 2.0 + 2.0 * len };
        let q: f64 = w.iter().enumerate().map(|(i, w)| w * f(h * i as f64)).sum();
        assert!((q - exact).abs() < 1e-12, "{count}");
    }
}

fn response_error(name: &str, poles: PolePolicy) -> f64 {
    let cfg = bundled(name).unwrap();
    let y0 = cfg.initial_or_default();
    let traj = evolve(&cfg.chain, &y0, &options(40.0, 0.02, 5)).unwrap();
    let dec = decompose(&traj, &y0).unwrap();
    let kernel = kernel_n(&cfg.chain, &traj.times, &[0, 1], poles).unwrap();
    let r = defect_response(&cfg.chain, &y0, &kernel, &dec.forcing(&cfg.chain)).unwrap();
    let mut worst: f64 = 0.0;
    for (ti, row) in r.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            worst = worst.max((x - dec.r[ti][k + 1]).abs());
        }
    }
    worst
}

#[test]
fn defect_response_matches_the_simulation() {
    assert!(response_error("p1_c", PolePolicy::Refuse) < 1e-4);
    assert!(response_error("n2_uniform", PolePolicy::Refuse) < 1e-4);
    assert!(response_error("r2", PolePolicy::Include) < 1e-4);
}

#[test]
fn defect_response_checks_grids() {
    let cfg = bundled("p1_c").unwrap();
    let y0 = cfg.initial_or_default();
    let kernel = kernel_n(&cfg.chain, &[0.0, 0.1, 0.2], &[0, 1], PolePolicy::Refuse).unwrap();
    assert!(defect_response(&cfg.chain, &y0, &kernel, &vec![vec![0.0]; 2]).is_err());
}

#[test]
fn zero_mode_limit_with_three_sites() {
    // All pinnings vanish: u(0, t) → Σ v₀(k) / (2 sqrt(γ m)).
    let b = Bulk::new(1.0, 1.0, 0.0);
    let d = |m: f64| DefectSite { mass: m, pinning: 0.0 };
    let chain = Chain::uniform(b, vec![d(1.5), d(2.0), d(1.2)], vec![0.8, 1.1]).unwrap();
    let mut y0 = LatticeState::zeros(0, 2);
    y0.set(0, 0.0, 0.6);
    y0.set(1, 0.0, 0.3);
    y0.set(2, 0.0, -0.1);
    let traj = evolve(&chain, &y0, &SimOptions::new(400.0)).unwrap();
    let limit = 0.8 / 2.0;
    let u = traj.block_series(0);
    let err = (u.last().unwrap() - limit).abs() / limit;
    assert!(err < 0.05, "{err}");
}

#[test]
fn runs_are_deterministic() {
    let cfg = bundled("p3_c").unwrap();
    let y0 = cfg.initial_or_default();
    let a = evolve(&cfg.chain, &y0, &SimOptions::new(30.0)).unwrap();
    let b = evolve(&cfg.chain, &y0, &SimOptions::new(30.0)).unwrap();
    assert_eq!(a.block_u, b.block_u);
    assert_eq!(a.norm, b.norm);
}
