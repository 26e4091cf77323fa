use crate::oracle::window_max;
use crate::Tally;
use defect_chain::chain::{Bulk, Chain, DefectSite};
use defect_chain::classifier::classify;
use defect_chain::config::{bundled, BUNDLED};
use defect_chain::decay::{default_bin_width, fit_decay, resonance_witness, Envelope, WitnessOptions};
use defect_chain::error::NumericError;
use defect_chain::propagator::{gamma_kernel, kernel_n, PolePolicy};
use defect_chain::simulator::{decompose, defect_response, evolve, SimOptions};
use rayon::prelude::*;

fn grid(t_max: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| t_max * i as f64 / (count - 1) as f64).collect()
}

pub fn energy_conservation() -> Tally {
    let results: Vec<(&str, Result<(f64, f64, usize), NumericError>)> = BUNDLED
        .par_iter()
        .map(|(name, _)| {
            let run = || {
                let cfg = bundled(name)?;
                let traj = evolve(&cfg.chain, &cfg.initial_or_default(), &SimOptions::new(400.0))?;
                Ok((traj.energy_drift(), traj.valid_horizon, traj.warnings.len()))
            };
            (*name, run())
        })
        .collect();
    let mut t = Tally::new();
    for (name, r) in results {
        match r {
            Ok((drift, valid, warnings)) => {
                t.check(drift < 1e-8 && valid >= 400.0 && warnings == 0, format!("{name} drift {drift:.1e}"))
            }
            Err(e) => t.error(name, e),
        }
    }
    t
}

fn norm_slope(name: &str) -> Result<f64, NumericError> {
    let cfg = bundled(name)?;
    let traj = evolve(&cfg.chain, &cfg.initial_or_default(), &SimOptions::new(400.0))?;
    let width = default_bin_width(&cfg.chain);
    Ok(fit_decay(&traj.times, &traj.norm, (40.0, 400.0), Envelope::BinMaxima(width))?.slope)
}

fn kernel_slope(name: &str) -> Result<f64, NumericError> {
    let chain = bundled(name)?.chain;
    let times = grid(400.0, 8001);
    let k = kernel_n(&chain, &times, &[0], PolePolicy::Refuse)?;
    let size = chain.n() + 1;
    // Largest entry at each time, so that every entry is covered.
    let env: Vec<f64> = (0..times.len())
        .map(|ti| (0..size * size).map(|e| k.get(0, ti, e / size, e % size).abs()).fold(0.0, f64::max))
        .collect();
    Ok(fit_decay(&times, &env, (40.0, 400.0), Envelope::BinMaxima(default_bin_width(&chain)))?.slope)
}

fn slopes(t: &mut Tally, label: &str, names: &[&str], f: fn(&str) -> Result<f64, NumericError>, range: (f64, f64)) {
    let out: Vec<_> = names.par_iter().map(|n| (*n, f(n))).collect();
    for (name, r) in out {
        match r {
            Ok(s) => t.check(s >= range.0 && s <= range.1, format!("{name} {label} slope {s:.3}")),
            Err(e) => t.error(name, e),
        }
    }
}

pub fn decay_condition_c() -> Tally {
    let mut t = Tally::new();
    slopes(&mut t, "norm", &["p1_c", "p2_c"], norm_slope, (-1.7, -1.3));
    slopes(&mut t, "kernel", &["p1_c", "p2_c"], kernel_slope, (-1.7, -1.3));
    t
}

pub fn decay_condition_c0() -> Tally {
    let mut t = Tally::new();
    slopes(&mut t, "norm", &["p1_c0_iii", "p1_c0_i", "p1_c0_ii"], norm_slope, (-0.65, -0.35));
    t
}

pub fn halfline_bound() -> Tally {
    let mut t = Tally::new();
    let times = grid(200.0, 8001);
    for (label, bulk) in [("unpinned", Bulk::new(1.0, 1.0, 0.0)), ("pinned", Bulk::new(1.0, 1.0, 1.0))] {
        match gamma_kernel(&bulk, 1, &times) {
            Ok(k) => {
                let scaled: Vec<f64> = k.series(0, 0, 0).iter().zip(&times).map(|(x, s)| x.abs() * (1.0 + s).powf(1.5)).collect();
                let first = window_max(&times, &scaled, 20.0, 38.0);
                let last = window_max(&times, &scaled, 182.0, 200.0);
                t.check(last <= 1.2 * first, format!("{label} bulk last/first {:.3}", last / first));
            }
            Err(e) => t.error(label, e),
        }
    }
    t
}

pub fn resonance_limits() -> Tally {
    let mut t = Tally::new();
    let zero_mode = |chain: &Chain, momenta: Vec<f64>| -> Result<(f64, f64), NumericError> {
        let v = classify(chain)?;
        let w = resonance_witness(chain, &v, &WitnessOptions { momenta, ..Default::default() })?;
        Ok((w.relative_error.unwrap_or(f64::INFINITY), w.observed))
    };
    match bundled("r1").map_err(NumericError::from).and_then(|c| zero_mode(&c.chain, vec![])) {
        Ok((err, u)) => t.check(err < 0.05, format!("single site u(0,200) {u:.4} error {:.1}%", 100.0 * err)),
        Err(e) => t.error("r1", e),
    }
    let b = Bulk::new(1.0, 1.0, 0.0);
    let d = |m: f64| DefectSite { mass: m, pinning: 0.0 };
    let block = Chain::uniform(b, vec![d(1.5), d(2.0), d(1.2)], vec![0.8, 1.1]).expect("valid chain");
    match zero_mode(&block, vec![0.6, 0.3, -0.1]) {
        Ok((err, u)) => t.check(err < 0.05, format!("three sites u(0,200) {u:.4} error {:.1}%", 100.0 * err)),
        Err(e) => t.error("three-site block", e),
    }
    for name in ["r2", "r3"] {
        let run = || -> Result<(f64, f64), NumericError> {
            let chain = bundled(name)?.chain;
            let v = classify(&chain)?;
            let w = resonance_witness(&chain, &v, &WitnessOptions::default())?;
            Ok((w.residual.unwrap_or(f64::INFINITY), w.fit.slope))
        };
        match run() {
            Ok((res, slope)) => {
                t.check(res < 1e-8, format!("{name} residual {res:.1e}"));
                t.check(slope.abs() < 0.05, format!("{name} slope {slope:.4}"));
            }
            Err(e) => t.error(name, e),
        }
    }
    t
}

fn response_gap(name: &str, poles: PolePolicy) -> Result<(f64, f64), NumericError> {
    let cfg = bundled(name)?;
    let y0 = cfg.initial_or_default();
    let mut opts = SimOptions::new(100.0);
    opts.dt = Some(0.02);
    // The convolution is a Simpson sum on the record grid, so its spacing
    // sets the error.
    opts.stride = 2;
    let traj = evolve(&cfg.chain, &y0, &opts)?;
    let dec = decompose(&traj, &y0)?;
    let kernel = kernel_n(&cfg.chain, &traj.times, &[0, 1], poles)?;
    let r = defect_response(&cfg.chain, &y0, &kernel, &dec.forcing(&cfg.chain))?;
    let mut worst: f64 = 0.0;
    for (ti, row) in r.iter().enumerate() {
        if traj.times[ti] > traj.valid_horizon {
            break;
        }
        for (k, x) in row.iter().enumerate() {
            worst = worst.max((x - dec.r[ti][k + 1]).abs());
        }
    }
    Ok((worst, traj.valid_horizon.min(100.0)))
}

pub fn cross_representation() -> Tally {
    let mut t = Tally::new();
    let cases = [
        ("p1_c", PolePolicy::Refuse),
        ("p1_c0_iii", PolePolicy::Refuse),
        ("r1", PolePolicy::Refuse),
        ("r2", PolePolicy::Include),
    ];
    let out: Vec<_> = cases.par_iter().map(|(n, p)| (*n, response_gap(n, *p))).collect();
    for (name, r) in out {
        match r {
            Ok((gap, horizon)) => t.check(gap < 1e-4, format!("{name} max gap {gap:.1e} up to t = {horizon}")),
            Err(e) => t.error(name, e),
        }
    }
    t
}
