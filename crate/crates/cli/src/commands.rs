use crate::error::CliError;
use crate::output::{num, sha256_hex, Sink};
use crate::{Common, IntegratorArg, RunArgs, SeriesArg, SideArg};
use defect_chain::chain::{BulkSide, Chain};
use defect_chain::classifier::classify as classify_chain;
use defect_chain::config::{parse_config, ChainConfig, BUNDLED};
use defect_chain::decay::{default_bin_width, fit_decay, resonance_witness, Envelope, Prediction, WitnessOptions};
use defect_chain::propagator::{gamma_kernel, kernel_n, GreenTable, PolePolicy};
use defect_chain::simulator::{evolve, Integrator, SimOptions, Trajectory};
use std::io::Write;
use std::path::Path;

// Output goes to a pipe that may close early (`| head`); that is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{ let _ = writeln!(std::io::stdout(), $($arg)*); }};
}
macro_rules! say_raw {
    ($($arg:tt)*) => {{ let _ = write!(std::io::stdout(), $($arg)*); }};
}

struct Loaded {
    label: String,
    source: String,
    hash: String,
    cfg: ChainConfig,
}

fn load(spec: &str) -> Result<Loaded, CliError> {
    let (label, text) = if let Some(name) = spec.strip_prefix("bundled:") {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| CliError::Config(format!("no bundled chain named {name}")))?;
        (name.to_string(), text.to_string())
    } else {
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {spec}: {e}")))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("chain").to_string();
        (stem, text)
    };
    let cfg = parse_config(&text)?;
    Ok(Loaded { label, source: spec.to_string(), hash: sha256_hex(text.as_bytes()), cfg })
}

fn sink(common: &Common, loaded: &Loaded, command: &str, mut settings: Vec<(String, String)>) -> Result<Sink, CliError> {
    settings.insert(0, ("source".into(), loaded.source.clone()));
    Sink::new(&common.out, &loaded.label, command, &loaded.hash, &settings)
}

fn check_positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {x}")))
    }
}

pub fn classify(common: &Common) -> Result<(), CliError> {
    let loaded = load(&common.config)?;
    let verdict = classify_chain(&loaded.cfg.chain)?;
    let report = verdict.report();
    let path = sink(common, &loaded, "classify", vec![])?.text("verdict.txt", &report)?;
    say_raw!("{report}");
    say!("written: {}", path.display());
    Ok(())
}

fn sim_options(cfg: &ChainConfig, run: &RunArgs) -> Result<(SimOptions, Vec<(String, String)>), CliError> {
    let horizon = check_positive("horizon", run.horizon.or(cfg.run.horizon).unwrap_or(400.0))?;
    let mut o = SimOptions::new(horizon);
    o.dt = run.dt.or(cfg.run.dt);
    o.alpha = run.alpha.or(cfg.run.alpha).unwrap_or(o.alpha);
    o.stride = run.stride.or(cfg.run.stride).unwrap_or(o.stride);
    o.integrator = match run.integrator {
        IntegratorArg::Gauss4 => Integrator::Gauss4,
        IntegratorArg::Verlet => Integrator::Verlet,
    };
    o.reach = run.reach;
    let settings = vec![
        ("horizon".into(), num(horizon)),
        ("dt".into(), o.dt.map_or("default".into(), num)),
        ("alpha".into(), num(o.alpha)),
        ("stride".into(), o.stride.to_string()),
        ("integrator".into(), format!("{:?}", run.integrator).to_lowercase()),
        ("reach".into(), o.reach.map_or("default".into(), |r| r.to_string())),
    ];
    Ok((o, settings))
}

fn block_columns(chain: &Chain) -> Vec<i64> {
    (-1..=chain.n() as i64 + 1).collect()
}

fn print_warnings(traj: &Trajectory) {
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }
}

pub fn simulate(common: &Common, run: &RunArgs) -> Result<(), CliError> {
    let loaded = load(&common.config)?;
    let chain = &loaded.cfg.chain;
    let (opts, settings) = sim_options(&loaded.cfg, run)?;
    let y0 = loaded.cfg.initial_or_default();
    let traj = evolve(chain, &y0, &opts)?;
    let out = sink(common, &loaded, "simulate", settings)?;
    let sites = block_columns(chain);
    let mut cols = vec!["t".to_string()];
    cols.extend(sites.iter().map(|s| format!("u{s}")));
    cols.extend(sites.iter().map(|s| format!("v{s}")));
    let rows = traj.times.iter().enumerate().map(|(i, t)| {
        let mut r = vec![num(*t)];
        r.extend(traj.block_u[i].iter().map(|x| num(*x)));
        r.extend(traj.block_v[i].iter().map(|x| num(*x)));
        r
    });
    let p1 = out.csv("trajectory.csv", &cols, rows)?;
    let cols = ["t", "energy", "norm"].map(String::from);
    let rows = (0..traj.times.len()).map(|i| vec![num(traj.times[i]), num(traj.energy[i]), num(traj.norm[i])]);
    let p2 = out.csv("series.csv", &cols, rows)?;
    say!("steps_recorded: {}", traj.times.len());
    say!("dt: {}", num(traj.dt));
    say!("energy_drift: {:.3e}", traj.energy_drift());
    say!("valid_horizon: {}", num(traj.valid_horizon));
    print_warnings(&traj);
    say!("written: {}\nwritten: {}", p1.display(), p2.display());
    Ok(())
}

fn time_grid(t_max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    check_positive("t-max", t_max)?;
    if points < 2 {
        return Err(CliError::Config("points must be at least 2".into()));
    }
    Ok((0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect())
}

pub fn kernel(common: &Common, t_max: f64, points: usize, orders: &[u32], include_poles: bool, gamma: Option<i64>) -> Result<(), CliError> {
    let loaded = load(&common.config)?;
    let chain = &loaded.cfg.chain;
    let times = time_grid(t_max, points)?;
    let mut settings = vec![("t_max".into(), num(t_max)), ("points".into(), points.to_string())];
    if let Some(n) = gamma {
        if n == 0 {
            return Err(CliError::Config("gamma distance must be nonzero".into()));
        }
        settings.push(("gamma_distance".into(), n.to_string()));
        let left = gamma_kernel(&chain.bulk_minus, n, &times)?;
        let right = gamma_kernel(&chain.bulk_plus, n, &times)?;
        let (l, r) = (left.series(0, 0, 0), right.series(0, 0, 0));
        let cols = ["t", "gamma_minus", "gamma_plus"].map(String::from);
        let rows = (0..times.len()).map(|i| vec![num(times[i]), num(l[i]), num(r[i])]);
        let path = sink(common, &loaded, "kernel", settings)?.csv("gamma.csv", &cols, rows)?;
        say!("quadrature_nodes: {}", left.nodes.max(right.nodes));
        say!("written: {}", path.display());
        return Ok(());
    }
    let poles = if include_poles { PolePolicy::Include } else { PolePolicy::Refuse };
    settings.push(("orders".into(), orders.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" ")));
    settings.push(("poles".into(), format!("{poles:?}").to_lowercase()));
    let k = kernel_n(chain, &times, orders, poles)?;
    let size = chain.n() + 1;
    let mut cols = vec!["t".to_string()];
    for o in orders {
        for n in 0..size {
            for j in 0..size {
                cols.push(format!("d{o}N_{n}_{j}"));
            }
        }
    }
    let rows = (0..times.len()).map(|ti| {
        let mut r = vec![num(times[ti])];
        for o in orders {
            for n in 0..size {
                for j in 0..size {
                    r.push(num(k.get(*o, ti, n, j)));
                }
            }
        }
        r
    });
    let path = sink(common, &loaded, "kernel", settings)?.csv("kernel.csv", &cols, rows)?;
    say!("quadrature_nodes: {}", k.nodes);
    say!("max_imaginary_part: {:.3e}", k.max_imag);
    say!("written: {}", path.display());
    Ok(())
}

pub fn greens(common: &Common, side: SideArg, times: &[f64], n_max: usize, halfline: Option<i64>) -> Result<(), CliError> {
    let loaded = load(&common.config)?;
    let bulk = *loaded.cfg.chain.bulk(if side == SideArg::Minus { BulkSide::Minus } else { BulkSide::Plus });
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(CliError::Config("times must be finite and nonnegative".into()));
    }
    if halfline.is_some_and(|k| k <= 0) {
        return Err(CliError::Config("half-line source site must be positive".into()));
    }
    let reach = n_max + halfline.unwrap_or(0) as usize;
    let mut rows = Vec::new();
    for &t in times {
        let table = GreenTable::new(&bulk, t, reach)?;
        match halfline {
            Some(k) => {
                for n in 1..=n_max as i64 {
                    let g = table.halfline(n, k).0;
                    rows.push(vec![num(t), n.to_string(), k.to_string(), num(g[0][0]), num(g[0][1]), num(g[1][0]), num(g[1][1])]);
                }
            }
            None => {
                for n in 0..=n_max as i64 {
                    let g = table.get(n).0;
                    rows.push(vec![num(t), n.to_string(), num(g[0][0]), num(g[0][1]), num(g[1][0]), num(g[1][1])]);
                }
            }
        }
    }
    let mut cols: Vec<String> = vec!["t".into(), "n".into()];
    if halfline.is_some() {
        cols.push("k".into());
    }
    cols.extend(["g00", "g01", "g10", "g11"].map(String::from));
    let settings = vec![
        ("side".into(), format!("{side:?}").to_lowercase()),
        ("n_max".into(), n_max.to_string()),
        ("halfline_source".into(), halfline.map_or("none".into(), |k| k.to_string())),
    ];
    let name = if halfline.is_some() { "halfline.csv" } else { "free.csv" };
    let path = sink(common, &loaded, "greens", settings)?.csv(name, &cols, rows)?;
    say!("written: {}", path.display());
    Ok(())
}

pub fn decay_fit(
    common: &Common,
    run: &RunArgs,
    window: Option<Vec<f64>>,
    series: SeriesArg,
    bin_width: Option<f64>,
    pointwise: bool,
) -> Result<(), CliError> {
    let loaded = load(&common.config)?;
    let chain = &loaded.cfg.chain;
    let (opts, mut settings) = sim_options(&loaded.cfg, run)?;
    let window = match window {
        Some(w) => (w[0], w[1]),
        None => loaded.cfg.run.fit_window.map_or((opts.horizon / 10.0, opts.horizon), |[a, b]| (a, b)),
    };
    let method = if pointwise {
        Envelope::Pointwise
    } else {
        Envelope::BinMaxima(check_positive("bin-width", bin_width.unwrap_or_else(|| default_bin_width(chain)))?)
    };
    let traj = evolve(chain, &loaded.cfg.initial_or_default(), &opts)?;
    print_warnings(&traj);
    let values = match series {
        SeriesArg::Norm => traj.norm.clone(),
        SeriesArg::U0 => traj.block_series(0),
    };
    let fit = fit_decay(&traj.times, &values, window, method)?;
    settings.push(("series".into(), format!("{series:?}").to_lowercase()));
    settings.push(("window".into(), format!("{} {}", num(window.0), num(window.1))));
    settings.push(("envelope".into(), method.to_string()));
    let out = sink(common, &loaded, "decay-fit", settings)?;
    let report = fit.report();
    let p1 = out.text("fit.txt", &report)?;
    let cols = ["log_t", "log_envelope"].map(String::from);
    let p2 = out.csv("envelope.csv", &cols, fit.points.iter().map(|(x, y)| vec![num(*x), num(*y)]))?;
    say_raw!("{report}");
    say!("written: {}\nwritten: {}", p1.display(), p2.display());
    Ok(())
}

pub fn resonance(common: &Common, horizon: f64, alpha: f64, momenta: Vec<f64>) -> Result<(), CliError> {
    let loaded = load(&common.config)?;
    let chain = &loaded.cfg.chain;
    let verdict = classify_chain(chain)?;
    let opts = WitnessOptions { horizon: check_positive("horizon", horizon)?, alpha, momenta };
    let w = resonance_witness(chain, &verdict, &opts)?;
    let verified = match w.prediction {
        Prediction::Limit(_) => w.relative_error.is_some_and(|e| e < 0.05),
        Prediction::Standing { .. } => w.residual.is_some_and(|r| r < 1e-8) && w.fit.slope.abs() < 0.05,
    };
    let settings = vec![("horizon".into(), num(horizon)), ("alpha".into(), num(alpha))];
    let out = sink(common, &loaded, "resonance", settings)?;
    let report = format!("{}verified: {}\n", w.report(), if verified { "yes" } else { "no" });
    let p1 = out.text("witness.txt", &report)?;
    let traj = &w.trajectory;
    let u0 = traj.block_series(0);
    let cols = ["t", "u0", "norm"].map(String::from);
    let p2 = out.csv("series.csv", &cols, (0..traj.times.len()).map(|i| vec![num(traj.times[i]), num(u0[i]), num(traj.norm[i])]))?;
    say_raw!("{report}");
    say!("written: {}\nwritten: {}", p1.display(), p2.display());
    if let Some(profile) = &w.profile {
        let cols = ["n", "v"].map(String::from);
        let p3 = out.csv("profile.csv", &cols, profile.sites().map(|s| vec![s.to_string(), num(profile.u_at(s))]))?;
        say!("written: {}", p3.display());
    }
    Ok(())
}

pub fn reproduce(out: &Path, criteria: &[u8]) -> Result<(), CliError> {
    let ids: Vec<u8> = if criteria.is_empty() { chainlab_acceptance::IDS.to_vec() } else { criteria.to_vec() };
    if let Some(bad) = ids.iter().find(|i| !chainlab_acceptance::IDS.contains(i)) {
        return Err(CliError::Config(format!("no criterion numbered {bad}")));
    }
    let mut lines = String::new();
    let mut failed = Vec::new();
    for id in &ids {
        let r = chainlab_acceptance::run(*id);
        say!("{r}");
        lines += &format!("{r}\n");
        if !r.passed {
            failed.push(*id);
        }
    }
    let summary = format!("passed: {}/{}\n", ids.len() - failed.len(), ids.len());
    say_raw!("{summary}");
    let list = ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
    let sink = Sink::new(out, "acceptance", "reproduce", &sha256_hex(list.as_bytes()), &[("criteria".into(), list)])?;
    let path = sink.text("summary.txt", &(lines + &summary))?;
    say!("written: {}", path.display());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(failed))
    }
}
