//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use lambert_coulomb::actions::{
    four_paths, reduced_action_bound, reduced_action_bound_forbidden, reduced_action_repulsive_forbidden,
    reduced_action_scatter_attractive, reduced_action_scatter_repulsive, round_trip, travel_time_bound,
};
use lambert_coulomb::geometry::{classify_region, lambert_variables};
use lambert_coulomb::qm_oracle::QmOracle;
use lambert_coulomb::semiclassical::{green_sc, green_sc_bound_product, green_sc_bound_sum, green_sc_tunnel, loop_argument};
use lambert_coulomb::uniform::{green_uniform, uniform_inputs};
use lambert_coulomb::vvpm::{vvpm_det, vvpm_matrix_numeric};
use lambert_coulomb::{energy_eigenvalue, energy_from_nu, EnergySpec, RegionTag, SystemParams};
use rand_chacha::ChaCha8Rng;
use lambert_coulomb_validation as support;
use support::{rel, rng, uniform};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// 1 ------------------------------------------------------------------------

fn loop_sine(energy: f64, p: &SystemParams) -> (f64, f64) {
    let spec = EnergySpec::from_energy(energy, p).unwrap();
    let k = loop_argument(round_trip(&spec, p).unwrap().0, p.ndim, p.hbar);
    ((PI * k).sin(), k)
}

fn eigenvalue_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut missing = Vec::new();
    for n in 2..=5 {
        let p = SystemParams::atomic(n).unwrap();
        let steps = 200_000;
        let (lo, hi) = (1e2f64.ln(), 1e-4f64.ln());
        let mut roots = Vec::new();
        let mut prev_e = -lo.exp();
        let mut prev = loop_sine(prev_e, &p);
        for i in 1..=steps {
            let e = -(lo + (hi - lo) * i as f64 / steps as f64).exp();
            let cur = loop_sine(e, &p);
            if prev.0 == 0.0 || prev.0.signum() != cur.0.signum() {
                let (mut a, mut b) = (prev_e, e);
                let sa = prev.0;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m == a || m == b {
                        break;
                    }
                    if loop_sine(m, &p).0.signum() == sa.signum() && sa != 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let root = if loop_sine(a, &p).0.abs() < loop_sine(b, &p).0.abs() { a } else { b };
                let k = loop_sine(root, &p).1.round();
                if k >= 0.0 {
                    roots.push((k as u32, root));
                }
            }
            prev_e = e;
            prev = cur;
        }
        for k in 0..=20u32 {
            match roots.iter().find(|(kk, _)| *kk == k) {
                Some(&(_, e)) => worst = worst.max(rel(e, energy_eigenvalue(k, &p))),
                None => missing.push((n, k)),
            }
        }
    }
    outcome(
        worst < 1e-12 && missing.is_empty(),
        format!("max rel err {worst:.2e} over n=2..5, k=0..20 (missing {missing:?})"),
    )
}

// 2 ------------------------------------------------------------------------

fn random_params(r: &mut ChaCha8Rng) -> SystemParams {
    SystemParams::new(uniform(r, 0.5, 2.0), uniform(r, 0.5, 2.0), 1.0, 3).unwrap()
}

fn closed_forms_vs_quadrature() -> Outcome {
    let mut r = rng(2);
    let draws = 1000;
    let mut worst = [0.0f64; 5];
    for _ in 0..draws {
        let p = random_params(&mut r);
        let bound = EnergySpec::from_energy(-uniform(&mut r, 0.05, 2.0), &p).unwrap();
        let a = bound.a;
        let alpha = 4.0 * a * uniform(&mut r, 1e-3, 1.0);
        let w = reduced_action_bound(alpha, &bound, &p).unwrap();
        worst[0] = worst[0].max(rel(w, support::bound_action_quad(alpha, a, p.mu, p.kc)));

        let scat = EnergySpec::from_energy(uniform(&mut r, 0.05, 2.0), &p).unwrap();
        let alpha = 20.0 * scat.a * uniform(&mut r, 1e-3, 1.0);
        let w = reduced_action_scatter_attractive(alpha, &scat, &p).unwrap();
        worst[1] = worst[1].max(rel(w, support::attractive_scatter_quad(alpha, scat.a, p.mu, p.kc)));

        let rep = p.repulsive();
        let alpha = 4.0 * scat.a * uniform(&mut r, 1.001, 10.0);
        let w = reduced_action_scatter_repulsive(alpha, &scat, &rep).unwrap();
        worst[2] = worst[2].max(rel(w, support::beyond_turning_quad(alpha, scat.a, p.mu, p.kc)));

        let alpha = 4.0 * scat.a * uniform(&mut r, 1e-3, 0.999);
        let w = reduced_action_repulsive_forbidden(alpha, &scat, &rep).unwrap().decaying();
        worst[3] = worst[3].max(rel(w.im.abs(), support::below_turning_quad(alpha, scat.a, p.mu, p.kc)));

        let alpha = 4.0 * a * uniform(&mut r, 1.001, 10.0);
        let w = reduced_action_bound_forbidden(alpha, &bound, &p).unwrap().decaying();
        let (w2pi, _) = round_trip(&bound, &p).unwrap();
        worst[4] = worst[4]
            .max(rel(w.im, support::beyond_turning_quad(alpha, a, p.mu, p.kc)))
            .max(rel(w.re, w2pi / 2.0));
    }
    let max = worst.iter().cloned().fold(0.0, f64::max);
    outcome(
        max < 1e-10,
        format!(
            "{draws} draws per form; max rel err bound {:.1e}, attractive E>0 {:.1e}, repulsive {:.1e}, repulsive forbidden {:.1e}, tunnel {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

// 3 ------------------------------------------------------------------------

struct Config {
    r: Vec<f64>,
    rp: Vec<f64>,
    spec: EnergySpec,
}

/// Random allowed configuration kept away from the caustic, the source and
/// the force centre.
fn allowed_config(r: &mut ChaCha8Rng, p: &SystemParams) -> Config {
    loop {
        let nu = uniform(r, 2.05, 30.0);
        if (nu - nu.round()).abs() < 0.05 {
            continue;
        }
        let spec = energy_from_nu(nu, p).unwrap();
        let a = spec.a;
        let x = support::random_vector(r, p.ndim, 1.6 * a);
        let y = support::random_vector(r, p.ndim, 1.6 * a);
        let pair = lambert_variables(&x, &y).unwrap();
        let edge = 4.0 * a;
        if pair.alpha_plus < 0.95 * edge && pair.s > 0.05 * a && pair.alpha_minus > 0.05 * a {
            return Config { r: x, rp: y, spec };
        }
    }
}

fn legendre_consistency() -> Outcome {
    let mut r = rng(3);
    let p = SystemParams::atomic(3).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let c = allowed_config(&mut r, &p);
        let pair = lambert_variables(&c.r, &c.rp).unwrap();
        let h = 1e-5 * c.spec.energy.abs();
        let at = |e: f64| four_paths(&pair, &EnergySpec::from_energy(e, &p).unwrap(), &p).unwrap();
        let (up, down, mid) = (at(c.spec.energy + h), at(c.spec.energy - h), at(c.spec.energy));
        for i in 0..4 {
            let fd = (up[i].w - down[i].w) / (2.0 * h);
            worst = worst.max(rel(fd, mid[i].t));
        }
    }
    outcome(worst < 1e-6, format!("500 configurations x 4 paths; max rel err {worst:.2e}"))
}

// 4 ------------------------------------------------------------------------

fn vvpm_vs_finite_differences() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_sub: f64 = 0.0;
    for n in [2usize, 3] {
        let p = SystemParams::atomic(n).unwrap();
        let mut r = rng(40 + n as u64);
        for _ in 0..100 {
            let c = allowed_config(&mut r, &p);
            let pair = lambert_variables(&c.r, &c.rp).unwrap();
            for id in 1..=4u8 {
                let action = |x: &[f64], y: &[f64], e: f64| {
                    let spec = EnergySpec::from_energy(e, &p).unwrap();
                    four_paths(&lambert_variables(x, y).unwrap(), &spec, &p).unwrap()[id as usize - 1].w
                };
                let num = vvpm_matrix_numeric(action, &c.r, &c.rp, c.spec.energy, &p).unwrap();
                let closed = vvpm_det(id, &pair, &c.spec, &p).unwrap().d;
                let err = if id <= 2 {
                    rel(num.det, closed)
                } else {
                    rel(num.det.abs(), closed.abs())
                };
                worst = worst.max(err);
                let sv = num.matrix.view((0, 0), (n, n)).clone_owned().singular_values();
                worst_sub = worst_sub.max(sv.min() / sv.max());
            }
        }
    }
    outcome(
        worst < 1e-5 && worst_sub < 1e-4,
        format!(
            "100 configurations each for n=2,3; max rel err {worst:.2e} (paths 3,4 by magnitude); d2W/dr dr' singular: max sigma_min/sigma_max {worst_sub:.2e}"
        ),
    )
}

// 5 ------------------------------------------------------------------------

fn identity_suite() -> Outcome {
    let mut r = rng(5);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        let p = SystemParams::atomic(n).unwrap();
        for _ in 0..200 {
            let c = allowed_config(&mut r, &p);
            let pair = lambert_variables(&c.r, &c.rp).unwrap();
            let d: Vec<f64> = (1..=4).map(|i| vvpm_det(i, &pair, &c.spec, &p).unwrap().d).collect();
            ok &= d[0] == -d[2] && d[1] == -d[3];
            let paths = four_paths(&pair, &c.spec, &p).unwrap();
            let (w2pi, t2pi) = round_trip(&c.spec, &p).unwrap();
            worst = worst
                .max(rel(paths[2].w + paths[0].w, w2pi))
                .max(rel(paths[3].w + paths[1].w, w2pi))
                .max(rel(paths[2].t + paths[0].t, t2pi))
                .max(rel(paths[3].t + paths[1].t, t2pi));
            let edge = 4.0 * c.spec.a;
            worst = worst
                .max(rel(reduced_action_bound(edge, &c.spec, &p).unwrap(), w2pi / 2.0))
                .max(rel(travel_time_bound(edge, &c.spec, &p).unwrap(), t2pi / 2.0));
        }
    }
    outcome(
        ok && worst < 1e-13,
        format!(
            "D1=-D3, D2=-D4 exact: {ok}; W3+W1 = W4+W2 = W_2pi, T likewise, W(4a) = W_2pi/2, t(4a) = T_2pi/2: max rel err {worst:.1e} (path 3 is the complement W_2pi - W1, so W3 - W1 = W_2pi - 2 W1)"
        ),
    )
}

// 6, 7, 8 -----------------------------------------------------------------

struct CutRow {
    x: f64,
    qm: f64,
    sc: Option<f64>,
    sc_im: f64,
    ua: f64,
    ua_im: f64,
    excluded_source: bool,
    near_caustic: bool,
}

struct Cut {
    rows: Vec<CutRow>,
    max_qm: f64,
    step: f64,
}

/// Cut parallel to x at fixed y through the Fig.-4-type configuration,
/// with every length scaled by `scale`.
fn cut(nu: f64, scale: f64, points: usize) -> Cut {
    let p = SystemParams::atomic(3).unwrap();
    let spec = energy_from_nu(nu, &p).unwrap();
    let source = [1232.0 * scale, 0.0, 0.0];
    let y = 400.0 * scale;
    let (x0, x1) = (-700.0 * scale, 1900.0 * scale);
    let step = (x1 - x0) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| x0 + step * i as f64).collect();
    let extent = xs
        .iter()
        .map(|&x| lambert_variables(&[x, y, 0.0], &source).unwrap().alpha_plus / 2.0)
        .fold(0.0, f64::max);
    let oracle = QmOracle::new(&spec, &p, extent, 0).unwrap();
    let edge = 4.0 * spec.a;
    // caustic abscissae: roots of alpha_+(x) = 4a on the cut
    let alpha = |x: f64| lambert_variables(&[x, y, 0.0], &source).unwrap().alpha_plus - edge;
    let mut caustics = Vec::new();
    for w in xs.windows(2) {
        if alpha(w[0]).signum() != alpha(w[1]).signum() {
            let (mut a, mut b) = (w[0], w[1]);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if alpha(m).signum() == alpha(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            caustics.push(0.5 * (a + b));
        }
    }
    let rows: Vec<CutRow> = xs
        .iter()
        .map(|&x| {
            let point = [x, y, 0.0];
            let pair = lambert_variables(&point, &source).unwrap();
            let qm = oracle.closed_value(&point, &source).unwrap();
            let sc = green_sc(&point, &source, &spec, &p).ok().map(|s| s.value);
            let ua = green_uniform(&point, &source, &spec, &p).unwrap().value;
            CutRow {
                x,
                qm,
                sc: sc.map(|v| v.re),
                sc_im: sc.map(|v| v.im).unwrap_or(0.0),
                ua: ua.re,
                ua_im: ua.im,
                excluded_source: pair.s < 5.0,
                near_caustic: caustics.iter().any(|c| (x - c).abs() <= 2.0),
            }
        })
        .collect();
    let max_qm = rows.iter().map(|r| r.qm.abs()).fold(0.0, f64::max);
    Cut { rows, max_qm, step }
}

fn zero_crossings(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..xs.len() {
        if ys[i - 1] == 0.0 || ys[i - 1].signum() != ys[i].signum() {
            let t = ys[i - 1] / (ys[i - 1] - ys[i]);
            out.push(xs[i - 1] + t * (xs[i] - xs[i - 1]));
        }
    }
    out
}

fn ua_on_cut(c: &Cut) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for r in c.rows.iter().filter(|r| !r.excluded_source) {
        let dev = ((r.ua - r.qm).powi(2) + r.ua_im.powi(2)).sqrt() / c.max_qm;
        if dev > worst {
            worst = dev;
            at = r.x;
        }
    }
    outcome(
        worst < 1e-2,
        format!("{} points; max |UA-QM|/max|QM| = {worst:.3e} at x = {at:.1}", c.rows.len()),
    )
}

fn sc_on_cut(c: &Cut, tol: f64) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    let (mut xs, mut sc, mut qm) = (Vec::new(), Vec::new(), Vec::new());
    for r in c.rows.iter().filter(|r| !r.excluded_source && !r.near_caustic) {
        let Some(s) = r.sc else { continue };
        let dev = ((s - r.qm).powi(2) + r.sc_im.powi(2)).sqrt() / c.max_qm;
        if dev > worst {
            worst = dev;
            at = r.x;
        }
        xs.push(r.x);
        sc.push(s);
        qm.push(r.qm);
    }
    let zs = zero_crossings(&xs, &sc);
    let zq = zero_crossings(&xs, &qm);
    let nodes_ok = zs.len() == zq.len() && zs.iter().zip(&zq).all(|(a, b)| (a - b).abs() <= c.step);
    let node_dev = zs.iter().zip(&zq).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        worst < tol && nodes_ok,
        format!(
            "max |SC-QM|/max|QM| = {worst:.3e} at x = {at:.1} (limit {tol}); nodes SC {} vs QM {}, max shift {node_dev:.2} (grid step {:.2})",
            zs.len(),
            zq.len(),
            c.step
        ),
    )
}

// 9 ------------------------------------------------------------------------

fn tunneling_decay() -> Outcome {
    let p = SystemParams::atomic(3).unwrap();
    let spec = energy_from_nu(29.2, &p).unwrap();
    let source = [1232.0, 0.0, 0.0];
    let start = 2.0 * spec.a;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    let mut finite = true;
    let mut deep = 0;
    let mut worst: f64 = 0.0;
    for i in 1..=400 {
        let x = start + 2.0 * i as f64;
        let point = [x, 0.0, 0.0];
        let pair = lambert_variables(&point, &source).unwrap();
        if classify_region(&pair, &spec, true).tag != RegionTag::Forbidden {
            continue;
        }
        let t = green_sc_tunnel(&point, &source, &spec, &p).unwrap().value.norm();
        finite &= t.is_finite() && t > 0.0;
        monotone &= t < prev;
        prev = t;
        let zeta = uniform_inputs(&point, &source, &spec, &p).unwrap().zeta;
        if zeta <= -5.0 {
            deep += 1;
            let u = green_uniform(&point, &source, &spec, &p).unwrap().value.norm();
            worst = worst.max(rel(u, t));
        }
    }
    outcome(
        finite && monotone && deep > 0 && worst < 0.05,
        format!("+x ray beyond the caustic: finite {finite}, monotone {monotone}; {deep} deep points (zeta <= -5), max |UA|/|SC| deviation {worst:.2e}"),
    )
}

// 10 -----------------------------------------------------------------------

fn loop_sum_factorization() -> Outcome {
    let p = SystemParams::atomic(3).unwrap();
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let c = allowed_config(&mut r, &p);
        let sum = green_sc_bound_sum(&c.r, &c.rp, &c.spec, &p, 200, 1e-3).unwrap();
        let product = green_sc_bound_product(&c.r, &c.rp, &c.spec, &p, 1e-3).unwrap();
        worst = worst.max((sum - product).norm() / product.norm());
    }
    let tail = (-2.0 * PI * 1e-3 * 201.0f64).exp();
    outcome(
        worst < 1e-6,
        format!("50 configurations, eta = 1e-3, j_max = 200: max rel diff {worst:.3e} (neglected tail factor e^(-2 pi eta (j_max+1)) = {tail:.3})"),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    };
    report(1, "eigenvalue exactness", &eigenvalue_exactness);
    report(2, "closed-form actions vs quadrature", &closed_forms_vs_quadrature);
    report(3, "dW/dE = travel time", &legendre_consistency);
    report(4, "VVPM closed form vs finite differences", &vvpm_vs_finite_differences);
    report(5, "identity suite", &identity_suite);
    let high = cut(29.2, 1.0, 261);
    report(6, "uniform approximation on the nu = 29.2 cut", &|| ua_on_cut(&high));
    report(7, "semiclassical on the nu = 29.2 cut", &|| sc_on_cut(&high, 0.05));
    let scale = (5.3f64 / 29.2).powi(2);
    let low = cut(5.3, scale, 261);
    report(8, "semiclassical on the scaled nu = 5.3 cut", &|| sc_on_cut(&low, 0.10));
    report(9, "tunneling decay", &tunneling_decay);
    report(10, "loop-sum factorization", &loop_sum_factorization);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
