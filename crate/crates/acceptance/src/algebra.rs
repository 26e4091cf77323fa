use crate::oracle::*;
use crate::Tally;
use defect_chain::chain::{Bulk, Chain};
use defect_chain::classifier::{classify, classify_n0, classify_p1, classify_p2, classify_p3, omega_search_max, VerdictKind};
use defect_chain::config::{bundled, BUNDLED};
use defect_chain::dispersion::{edge_series, theta, Approach, Edge};
use defect_chain::jacobi::{assemble_frame, inner_minor, invert_usmani, pivots, FrameMode, MinorLadder};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn jacobi_exactness() -> Tally {
    let mut r = rng(1);
    let (mut minors, mut pivot, mut inner, mut inverse, mut identity) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for case in 0..500 {
        let size = 1 + case % 9;
        let f = random_frame(&mut r, size);
        let m = dense(&f);
        let ladder = MinorLadder::new(&f);
        for i in 0..size {
            minors = minors.max(rel_err(ladder.alpha(i as isize), block_det(&m, 0, i)));
            minors = minors.max(rel_err(ladder.beta(i), block_det(&m, i, size - 1)));
        }
        let det = block_det(&m, 0, size - 1);
        match pivots(&f) {
            Ok(p) => {
                pivot = pivot.max(rel_err(p.forward.iter().product(), det));
                pivot = pivot.max(rel_err(p.backward.iter().product(), det));
            }
            Err(e) => failures.push(format!("pivots: {e}")),
        }
        if size >= 4 {
            let n = size - 1;
            for j in 1..n {
                for k in j..n {
                    match inner_minor(&f, j, k) {
                        Ok(x) => inner = inner.max(rel_err(x, block_det(&m, j, k))),
                        Err(e) => failures.push(format!("inner minor: {e}")),
                    }
                }
            }
            let d = |j, k| inner_minor(&f, j, k).unwrap_or_default();
            let (p, q) = (d(2, n - 1) * d(1, n - 2), d(2, n - 2) * d(1, n - 1));
            let rhs: f64 = f.couplings[1..n - 1].iter().map(|g| g * g).product();
            identity = identity.max((p - q - rhs).norm() / p.norm().max(q.norm()).max(rhs));
        }
        match invert_usmani(&f) {
            Ok(inv) => {
                let oracle = m.clone().try_inverse().expect("random frame is invertible");
                let scale = oracle.iter().map(|x| x.norm()).fold(0.0, f64::max);
                for i in 0..size {
                    for j in 0..size {
                        inverse = inverse.max((inv.get(i, j) - oracle[(i, j)]).norm() / scale);
                    }
                }
            }
            Err(e) => failures.push(format!("inverse: {e}")),
        }
    }
    let mut t = Tally::new();
    let tol = 1e-11;
    t.check(failures.is_empty(), format!("{} library errors", failures.len()));
    t.check(minors < tol, format!("minors {minors:.1e}"));
    t.check(pivot < tol, format!("pivot products {pivot:.1e}"));
    t.check(inner < tol, format!("inner minors {inner:.1e}"));
    t.check(inverse < tol, format!("inverse {inverse:.1e}"));
    t.check(identity < tol, format!("inner-minor identity {identity:.1e}"));
    t
}

fn residual(b: &Bulk, th: Complex64, w: Complex64) -> f64 {
    (b.nu_sq() * (2.0 - 2.0 * th.cos()) + b.kappa_sq() - w * w).norm()
}

pub fn branch_correctness() -> Tally {
    let bulks = [Bulk::new(1.0, 1.0, 0.0), Bulk::new(2.0, 0.5, 1.0), Bulk::new(0.5, 3.0, 0.2), Bulk::new(1.5, 1.0, 4.0)];
    let mut t = Tally::new();
    let (mut worst, mut min_im, mut bad_sign, mut series_err) = (0.0f64, f64::INFINITY, 0usize, 0.0f64);
    let mut errors = 0;
    for b in &bulks {
        // 2500 points per bulk, 10⁴ in all, avoiding the real axis.
        for i in 0..50 {
            for j in 0..50 {
                let w = Complex64::new(-3.0 * b.a() + 6.0 * b.a() * i as f64 / 49.0, -2.0 + 4.0 * (j as f64 + 0.5) / 50.0);
                match theta(b, Approach::Interior(w)) {
                    Ok(br) => {
                        worst = worst.max(residual(b, br.theta, w) / w.norm_sqr().max(1.0));
                        min_im = min_im.min(br.theta.im);
                    }
                    Err(_) => errors += 1,
                }
            }
        }
        let (k, a) = b.band();
        for i in 1..200 {
            let w = k + (a - k) * i as f64 / 200.0;
            for s in [w, -w] {
                match theta(b, Approach::Above(s)) {
                    Ok(br) if br.theta.im.abs() < 1e-12 && br.theta.re.sin().signum() == s.signum() => {}
                    _ => bad_sign += 1,
                }
            }
        }
        let mut edges = vec![(Edge::A, a)];
        if k > 0.0 {
            edges.push((Edge::Kappa, k));
        } else {
            edges.push((Edge::Zero, 0.0));
        }
        for (edge, at) in edges {
            let Ok(series) = edge_series(b, edge) else {
                errors += 1;
                continue;
            };
            for dir in [c(1.0, 1.0), c(-1.0, 1.0), c(0.0, 1.0)] {
                let w = c(at, 0.0) + 1e-4 * dir / dir.norm();
                if let Ok(exact) = theta(b, Approach::Interior(w)) {
                    series_err = series_err.max((series.evaluate(w, 3) - exact.z).norm() / exact.z.norm());
                }
            }
        }
    }
    t.check(errors == 0, format!("{errors} evaluation errors"));
    t.check(worst < 1e-12, format!("residual {worst:.1e} on 10000 points"));
    t.check(min_im > 0.0, format!("min Im theta {min_im:.1e}"));
    t.check(bad_sign == 0, format!("{bad_sign} sign-rule violations"));
    t.check(series_err < 1e-5, format!("edge series {series_err:.1e}"));
    t
}

pub fn upper_half_plane() -> Tally {
    let mut t = Tally::new();
    for (name, _) in BUNDLED {
        let chain = match bundled(name) {
            Ok(c) => c.chain,
            Err(e) => {
                t.error(name, e);
                continue;
            }
        };
        let top = 2.0 * omega_search_max(&chain);
        let mut least = f64::INFINITY;
        for i in 0..=120 {
            let x = -top + 2.0 * top * i as f64 / 120.0;
            for j in 0..40 {
                let y = top * 10f64.powf(-6.0 + 6.0 * j as f64 / 39.0);
                let at = Approach::Interior(Complex64::new(x, y));
                match assemble_frame(&chain, FrameMode::Analytic(at)) {
                    Ok(f) => least = least.min(f.det().norm()),
                    Err(_) => least = 0.0,
                }
            }
        }
        t.check(least > 0.0 && least.is_finite(), format!("{name} min |det| {least:.2e}"));
    }
    t
}

/// Upper edge (`at_a`) or lower edge assertions, each from its own
/// definition: determinant sign on a grid, all leading minors on the grid,
/// and leading minors at the edge itself.
fn edge_assertions(chain: &Chain, at_a: bool) -> [bool; 3] {
    let b = chain.bulk_minus;
    let grid: Vec<f64> = if at_a {
        let top = omega_search_max(chain);
        (1..=400).map(|i| b.a() + (top - b.a()) * (i as f64 / 400.0).powi(2)).collect()
    } else {
        (1..=400).map(|i| b.kappa() * (1.0 - (i as f64 / 400.0).powi(2))).collect()
    };
    let want = |n: usize, x: f64| if at_a { x * (-1f64).powi(n as i32) < 0.0 } else { x > 0.0 };
    let size = chain.n() + 1;
    let a2 = grid.iter().all(|w| want(size - 1, real_symbol(chain, *w, None).determinant()));
    let a3 = grid.iter().all(|w| leading_dets(&real_symbol(chain, *w, None)).iter().enumerate().all(|(n, x)| want(n, *x)));
    let (w, z) = if at_a { (b.a(), -1.0) } else { (b.kappa(), 1.0) };
    let edge = leading_dets(&real_symbol(chain, w, Some(z)));
    let tol = 1e-9 * edge.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let a6 = edge.iter().enumerate().all(|(n, x)| if n + 1 < size { want(n, *x) } else { want(n, *x) || x.abs() <= tol });
    [a2, a3, a6]
}

fn random_single(r: &mut ChaCha8Rng, pattern: u8) -> Chain {
    match pattern {
        1 => {
            let pinned = r.gen_bool(0.6);
            let b = random_bulk(r, pinned);
            let mu0 = if r.gen_bool(0.9) { r.gen_range(0.0..4.0) } else { 0.0 };
            Chain::single(b, b, r.gen_range(0.2..3.0), mu0)
        }
        2 => {
            let side = |r: &mut ChaCha8Rng| {
                let mu = if r.gen_bool(0.5) { r.gen_range(0.0..2.0) } else { 0.0 };
                Bulk::new(1.0, r.gen_range(0.2..3.0), mu)
            };
            let (lb, rb) = (side(r), side(r));
            Chain::single(lb, rb, 1.0, r.gen_range(0.0..5.0))
        }
        _ => {
            let lb = Bulk::new(r.gen_range(0.2..3.0), r.gen_range(0.2..3.0), 0.0);
            let rb = Bulk::new(r.gen_range(0.2..3.0), r.gen_range(0.2..3.0), 0.0);
            Chain::single(lb, rb, r.gen_range(0.2..3.0), r.gen_range(0.01..5.0))
        }
    }
    .expect("valid random chain")
}

pub fn classifier_equivalences() -> Tally {
    let mut t = Tally::new();
    let mut r = rng(4);
    let (mut disagree, mut verdict_mismatch, mut mass_violations, mut c_like) = (0, 0, 0, 0);
    for i in 0..200 {
        let n = 1 + i % 4;
        let chain = random_uniform_chain(&mut r, n);
        let upper = edge_assertions(&chain, true);
        let pinned = chain.bulk_minus.pinning > 0.0;
        let lower = if pinned { edge_assertions(&chain, false) } else { [true; 3] };
        if upper.iter().any(|x| *x != upper[0]) || lower.iter().any(|x| *x != lower[0]) {
            disagree += 1;
        }
        let expect = upper[0] && lower[0] && !chain.all_pinning_zero();
        let verdict = match classify(&chain) {
            Ok(v) => v.kind(),
            Err(e) => {
                t.error("classify", e);
                continue;
            }
        };
        let got = matches!(verdict, VerdictKind::C | VerdictKind::C0);
        if got != expect {
            verdict_mismatch += 1;
        }
        if got {
            c_like += 1;
            let half = 0.5 * chain.bulk_minus.mass;
            if chain.defects[0].mass <= half || chain.defects[n].mass <= half {
                mass_violations += 1;
            }
        }
    }
    t.check(disagree == 0, format!("edge assertions disagree on {disagree}/200 chains"));
    t.check(verdict_mismatch == 0, format!("verdict differs from assertions on {verdict_mismatch}/200"));
    t.check(mass_violations == 0, format!("mass condition fails on {mass_violations}/{c_like} C or C0 chains"));
    for (pattern, form) in [
        (1u8, classify_p1 as fn(&Chain) -> Option<VerdictKind>),
        (2, classify_p2 as fn(&Chain) -> Option<VerdictKind>),
        (3, classify_p3 as fn(&Chain) -> Option<VerdictKind>),
    ] {
        let mut r = rng(40 + pattern as u64);
        let mut bad = 0;
        for _ in 0..500 {
            let chain = random_single(&mut r, pattern);
            if form(&chain) != Some(classify_n0(&chain).kind()) {
                bad += 1;
            }
        }
        t.check(bad == 0, format!("P{pattern} form disagrees on {bad}/500"));
    }
    t
}
