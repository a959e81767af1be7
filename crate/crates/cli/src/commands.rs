//! Subcommand implementations. Each returns rows; `main` writes them.

use lambert_coulomb::actions::{basic_actions, four_paths_from};
use lambert_coulomb::geometry::{classify_region, lambert_variables_nd, RegionTag};
use lambert_coulomb::model::quantization_action;
use lambert_coulomb::qm_oracle::QmOracle;
use lambert_coulomb::semiclassical::{green_sc, POLE_GUARD};
use lambert_coulomb::uniform::green_uniform;
use lambert_coulomb::{energy_eigenvalue, Complex64, Error, SystemParams};
use rayon::prelude::*;

use crate::config::{MethodChoice, Physics, QmRoute, ScanConfig};
use crate::error::CliError;
use crate::output::{num, text};

pub struct EigenRow {
    pub k: u32,
    pub energy: f64,
    pub w_2pi: f64,
}

pub fn cmd_eigenvalues(kmax: u32, params: &SystemParams) -> Vec<EigenRow> {
    (0..=kmax)
        .map(|k| EigenRow {
            k,
            energy: energy_eigenvalue(k, params),
            w_2pi: quantization_action(k, params),
        })
        .collect()
}

pub const EIGEN_HEADER: &str = "k,E,W_2pi";

impl EigenRow {
    pub fn csv(&self) -> String {
        format!("{},{},{}", self.k, num(self.energy), num(self.w_2pi))
    }
}

/// Whole-run guard: no Green function exists on a bound-state pole.
fn pole_guard(physics: &Physics) -> Result<(), CliError> {
    if physics.spec.energy < 0.0 && physics.params.is_attractive() {
        let k = physics.spec.bound_k()?;
        if (k - k.round()).abs() < POLE_GUARD {
            return Err(CliError::Numerical(format!(
                "energy lies on the bound-state pole k = {}",
                k.round()
            )));
        }
    }
    Ok(())
}

fn pair_for(point: &[f64], cfg: &ScanConfig) -> Result<lambert_coulomb::LambertPair, Error> {
    lambert_variables_nd(point, &cfg.source, cfg.physics.params.ndim)
}

enum Oracle {
    Ready(QmOracle),
    Unavailable(String),
}

fn build_oracle(cfg: &ScanConfig, points: &[Vec<f64>]) -> Oracle {
    let Physics { params, spec } = cfg.physics;
    let mut extent: f64 = 0.0;
    for p in points {
        if let Ok(pair) = pair_for(p, cfg) {
            extent = extent.max(pair.alpha_plus / 2.0).max(pair.r).max(pair.rp);
        }
    }
    let l_max = match cfg.qm_route {
        QmRoute::Closed => 0,
        QmRoute::PartialWave => cfg.lmax,
    };
    match QmOracle::new(&spec, &params, extent, l_max) {
        Ok(o) => Oracle::Ready(o),
        Err(e) => Oracle::Unavailable(e.to_string()),
    }
}

fn eval_qm(oracle: &Oracle, route: QmRoute, point: &[f64], source: &[f64]) -> Result<Complex64, String> {
    match oracle {
        Oracle::Unavailable(why) => Err(format!("quantum reference unavailable: {why}")),
        Oracle::Ready(o) => {
            let v = match route {
                QmRoute::Closed => o.closed_value(point, source),
                QmRoute::PartialWave => o.partial_wave_sum(point, source).map(|(v, _)| v),
            };
            v.map(|v| Complex64::new(v, 0.0)).map_err(|e| e.to_string())
        }
    }
}

fn method_list(m: MethodChoice) -> &'static [&'static str] {
    match m {
        MethodChoice::Sc => &["sc"],
        MethodChoice::Ua => &["ua"],
        MethodChoice::Qm => &["qm"],
        MethodChoice::All => &["sc", "ua", "qm"],
    }
}

pub struct ScanRow {
    pub coords: Vec<f64>,
    pub value: Complex64,
    pub method: &'static str,
    pub region: &'static str,
    pub reason: String,
}

impl ScanRow {
    pub fn csv(&self) -> String {
        let coords: Vec<String> = self.coords.iter().map(|&c| num(c)).collect();
        format!(
            "{},{},{},{},{},{}",
            coords.join(","),
            num(self.value.re),
            num(self.value.im),
            self.method,
            self.region,
            text(&self.reason)
        )
    }
}

pub fn scan_header(cfg: &ScanConfig) -> String {
    let names: Vec<&str> = cfg.axes.iter().map(|a| a.name.as_str()).collect();
    format!("{},re,im,method,region,reason", names.join(","))
}

const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

pub fn cmd_scan(cfg: &ScanConfig) -> Result<Vec<ScanRow>, CliError> {
    pole_guard(&cfg.physics)?;
    let Physics { params, spec } = cfg.physics;
    let points = cfg.points();
    let methods = method_list(cfg.method);
    let oracle = if methods.contains(&"qm") {
        build_oracle(cfg, &points)
    } else {
        Oracle::Unavailable("not requested".into())
    };
    let rows: Vec<Vec<ScanRow>> = points
        .par_iter()
        .map(|point| {
            let coords: Vec<f64> = cfg.axes.iter().map(|a| point[a.index]).collect();
            let pair = pair_for(point, cfg);
            let region = match &pair {
                Ok(p) => classify_region(p, &spec, params.is_attractive()).tag.as_str(),
                Err(_) => "Undefined",
            };
            methods
                .iter()
                .map(|&m| {
                    let result = match &pair {
                        Err(e) => Err(e.to_string()),
                        Ok(p) if p.s < cfg.exclude_radius => {
                            Err(format!("within exclusion radius {} of the source", cfg.exclude_radius))
                        }
                        Ok(_) => match m {
                            "sc" => green_sc(point, &cfg.source, &spec, &params).map(|s| s.value).map_err(|e| e.to_string()),
                            "ua" => green_uniform(point, &cfg.source, &spec, &params)
                                .map(|s| s.value)
                                .map_err(|e| e.to_string()),
                            _ => eval_qm(&oracle, cfg.qm_route, point, &cfg.source),
                        },
                    };
                    let (value, reason) = match result {
                        Ok(v) => (v, String::new()),
                        Err(why) => (NAN, why),
                    };
                    ScanRow {
                        coords: coords.clone(),
                        value,
                        method: m,
                        region,
                        reason,
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub struct CutRow {
    pub x: f64,
    pub qm: f64,
    pub sc: f64,
    pub ua: f64,
    pub dev_sc: f64,
    pub dev_ua: f64,
    pub reason: String,
}

pub fn cut_header(cfg: &ScanConfig) -> String {
    format!("{},G_qm,G_sc,G_ua,dev_sc,dev_ua,reason", cfg.axes[0].name)
}

impl CutRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            num(self.x),
            num(self.qm),
            num(self.sc),
            num(self.ua),
            num(self.dev_sc),
            num(self.dev_ua),
            text(&self.reason)
        )
    }
}

/// Summary statistics of a cut, written next to the table.
pub struct CutSummary {
    pub max_qm: f64,
    pub caustics: Vec<f64>,
    pub max_dev_sc: f64,
    pub max_dev_ua: f64,
    pub exclude_radius: f64,
}

impl CutSummary {
    pub fn render(&self) -> String {
        let c: Vec<String> = self.caustics.iter().map(|x| format!("{x:.4}")).collect();
        format!(
            "max|G_qm| = {:.6e}; caustic crossings at [{}]; max|dev_sc| (outside +-2 of the caustics) = {:.4e}; max|dev_ua| = {:.4e}; points with s < {} excluded",
            self.max_qm,
            c.join(", "),
            self.max_dev_sc,
            self.max_dev_ua,
            self.exclude_radius
        )
    }
}

/// Width of the window around each caustic crossing left out of max|dev_sc|.
pub const CAUSTIC_WINDOW: f64 = 2.0;

pub fn cmd_cut(cfg: &ScanConfig) -> Result<(Vec<CutRow>, CutSummary), CliError> {
    pole_guard(&cfg.physics)?;
    let Physics { params, spec } = cfg.physics;
    let points = cfg.points();
    let axis = cfg.axes[0].index;
    let oracle = build_oracle(cfg, &points);
    if let Oracle::Unavailable(why) = &oracle {
        return Err(CliError::Numerical(format!("quantum reference unavailable: {why}")));
    }
    let raw: Vec<(f64, Result<f64, String>, Result<Complex64, String>, Result<Complex64, String>)> = points
        .par_iter()
        .map(|point| {
            let x = point[axis];
            let pair = pair_for(point, cfg);
            match pair {
                Err(e) => (x, Err(e.to_string()), Err(e.to_string()), Err(e.to_string())),
                Ok(p) if p.s < cfg.exclude_radius => {
                    let why = format!("within exclusion radius {} of the source", cfg.exclude_radius);
                    (x, Err(why.clone()), Err(why.clone()), Err(why))
                }
                Ok(_) => (
                    x,
                    eval_qm(&oracle, cfg.qm_route, point, &cfg.source).map(|v| v.re),
                    green_sc(point, &cfg.source, &spec, &params).map(|s| s.value).map_err(|e| e.to_string()),
                    green_uniform(point, &cfg.source, &spec, &params)
                        .map(|s| s.value)
                        .map_err(|e| e.to_string()),
                ),
            }
        })
        .collect();
    let max_qm = raw
        .iter()
        .filter_map(|r| r.1.as_ref().ok())
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if !(max_qm > 0.0) {
        return Err(CliError::Numerical("no valid quantum reference value on the cut".into()));
    }

    let edge = 4.0 * spec.a;
    let excess = |x: f64| {
        let mut p = cfg.fixed.clone();
        p[axis] = x;
        pair_for(&p, cfg).map(|pair| pair.alpha_plus - edge).unwrap_or(f64::NAN)
    };
    let mut caustics = Vec::new();
    for w in raw.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        let (fa, fb) = (excess(a), excess(b));
        if fa == 0.0 {
            caustics.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if excess(mid).signum() == fa.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            caustics.push(0.5 * (lo + hi));
        }
    }

    let mut max_dev_sc: f64 = 0.0;
    let mut max_dev_ua: f64 = 0.0;
    let rows = raw
        .into_iter()
        .map(|(x, qm, sc, ua)| {
            let mut reasons = Vec::new();
            let qm_v = qm.unwrap_or_else(|e| {
                reasons.push(format!("qm: {e}"));
                f64::NAN
            });
            let sc_v = sc.unwrap_or_else(|e| {
                reasons.push(format!("sc: {e}"));
                NAN
            });
            let ua_v = ua.unwrap_or_else(|e| {
                reasons.push(format!("ua: {e}"));
                NAN
            });
            let dev_sc = (sc_v.re - qm_v) / max_qm;
            let dev_ua = (ua_v.re - qm_v) / max_qm;
            if dev_sc.is_finite() && caustics.iter().all(|c| (x - c).abs() > CAUSTIC_WINDOW) {
                max_dev_sc = max_dev_sc.max(dev_sc.abs());
            }
            if dev_ua.is_finite() {
                max_dev_ua = max_dev_ua.max(dev_ua.abs());
            }
            CutRow {
                x,
                qm: qm_v,
                sc: sc_v.re,
                ua: ua_v.re,
                dev_sc,
                dev_ua,
                reason: reasons.join("; "),
            }
        })
        .collect();
    Ok((
        rows,
        CutSummary {
            max_qm,
            caustics,
            max_dev_sc,
            max_dev_ua,
            exclude_radius: cfg.exclude_radius,
        },
    ))
}

pub struct TofRow {
    pub path: u8,
    pub loops: u32,
    pub w: f64,
    pub t: f64,
    pub morse: u32,
}

pub const TOF_HEADER: &str = "path,loops,W,T,morse";

impl TofRow {
    pub fn csv(&self) -> String {
        format!("{},{},{},{},{}", self.path, self.loops, num(self.w), num(self.t), self.morse)
    }
}

pub fn cmd_tof(r: &[f64], rp: &[f64], physics: &Physics, loops: u32) -> Result<Vec<TofRow>, CliError> {
    let Physics { params, spec } = *physics;
    if !(spec.energy < 0.0 && params.is_attractive()) {
        return Err(CliError::Config("travel times of the four paths need attractive E < 0".into()));
    }
    let pair = lambert_variables_nd(r, rp, params.ndim)?;
    let region = classify_region(&pair, &spec, true);
    match region.tag {
        RegionTag::Allowed => {}
        RegionTag::OnCaustic => {
            return Err(CliError::Config(format!(
                "r + r' + s = 4a within tolerance (margin {:.3e}): the endpoints sit on the caustic, where the two direct arcs merge",
                region.margin
            )))
        }
        RegionTag::Forbidden => {
            return Err(CliError::Config(format!(
                "r + r' + s = {:.6e} exceeds 4a = {:.6e}: no Kepler ellipse of this energy joins the two points",
                pair.alpha_plus,
                4.0 * spec.a
            )))
        }
    }
    let basic = basic_actions(&pair, &spec, &params)?;
    let base = four_paths_from(&basic, params.ndim);
    let mut out = Vec::new();
    for j in 0..=loops {
        for p in &base {
            let q = p.with_loops(j, &basic, params.ndim);
            out.push(TofRow {
                path: q.path_id,
                loops: q.loops,
                w: q.w,
                t: q.t,
                morse: q.morse,
            });
        }
    }
    Ok(out)
}
