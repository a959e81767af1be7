//! Assembly of the semiclassical Green function: elementary four-path sum,
//! closed-form loop summation, the bound-state formula, scattering and the
//! tunnel continuation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::actions::{
    basic_actions, four_paths_from, reduced_action_bound, reduced_action_bound_forbidden,
    reduced_action_repulsive_forbidden, reduced_action_scatter_attractive, reduced_action_scatter_repulsive,
    round_trip, velocity, velocity_scatter, BasicActions,
};
use crate::error::{Error, Result};
use crate::geometry::{classify_region, lambert_variables_nd, LambertPair, RegionClass, RegionTag};
use crate::model::{EnergySpec, SystemParams};
use crate::vvpm::vvpm_from_velocities;

/// Relative guard band around integer k inside which bound-state values are
/// reported as poles.
pub const POLE_GUARD: f64 = 1e-9;

/// Tolerance for `loop_factor` itself.
pub const LOOP_POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sc,
    Ua,
    Qm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sc => "sc",
            Method::Ua => "ua",
            Method::Qm => "qm",
        }
    }
}

/// A Green-function value with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub r: Vec<f64>,
    pub rp: Vec<f64>,
    pub energy: f64,
    pub method: Method,
    pub value: Complex64,
    pub region: RegionClass,
}

/// e^{i pi m/4}, exact for multiples of pi/2.
pub(crate) fn eighth_root(m: i64) -> Complex64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match m.rem_euclid(8) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(h, h),
        2 => Complex64::new(0.0, 1.0),
        3 => Complex64::new(-h, h),
        4 => Complex64::new(-1.0, 0.0),
        5 => Complex64::new(-h, -h),
        6 => Complex64::new(0.0, -1.0),
        _ => Complex64::new(h, -h),
    }
}

/// (1/(i hbar)) (-1)/(-2 pi i hbar)^{(n-1)/2}, principal branch.
pub fn prefactor(params: &SystemParams) -> Complex64 {
    let p = params.half_transverse();
    eighth_root(params.ndim as i64 + 1) / (params.hbar * (2.0 * PI * params.hbar).powf(p))
}

/// -(i/hbar)(2 pi i hbar)^{-(n-1)/2}, the outgoing-wave prefactor of the E > 0 problem.
pub fn scatter_prefactor(params: &SystemParams) -> Complex64 {
    let p = params.half_transverse();
    eighth_root(-(params.ndim as i64) - 1) / (params.hbar * (2.0 * PI * params.hbar).powf(p))
}

/// k = W_2pi/(2 pi hbar) - m_2pi/4 with m_2pi = 2(n-1).
pub fn loop_argument(w_2pi: f64, ndim: usize, hbar: f64) -> f64 {
    w_2pi / (2.0 * PI * hbar) - (ndim as f64 - 1.0) / 2.0
}

/// 1/2 + (i/2) cot(pi k): the closed sum over repeated round trips.
pub fn loop_factor(w_2pi: f64, ndim: usize, hbar: f64) -> Result<Complex64> {
    if !(w_2pi > 0.0) {
        return Err(Error::InvalidParams(format!("W_2pi must be positive, got {w_2pi}")));
    }
    let k = loop_argument(w_2pi, ndim, hbar);
    let frac = k - k.round();
    if frac.abs() < LOOP_POLE_TOL {
        return Err(Error::Pole { k: k.round() });
    }
    Ok(Complex64::new(0.5, 0.5 / (PI * frac).tan()))
}

/// sum_j e^{2 pi i j kappa} = 1/(1 - e^{2 pi i kappa}) for Im kappa > 0.
pub fn loop_factor_complex(kappa: Complex64) -> Complex64 {
    let frac = Complex64::new(kappa.re - kappa.re.round(), kappa.im);
    Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - (Complex64::i() * 2.0 * PI * frac).exp())
}

fn check_pole(k: f64) -> Result<()> {
    if (k - k.round()).abs() < POLE_GUARD {
        Err(Error::Pole { k: k.round() })
    } else {
        Ok(())
    }
}

fn setup(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<(LambertPair, RegionClass)> {
    params.validate()?;
    let pair = lambert_variables_nd(r_vec, rp_vec, params.ndim)?;
    let region = classify_region(&pair, spec, params.is_attractive());
    Ok((pair, region))
}

fn sample(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, method: Method, value: Complex64, region: RegionClass) -> FieldSample {
    FieldSample {
        r: r_vec.to_vec(),
        rp: rp_vec.to_vec(),
        energy: spec.energy,
        method,
        value,
        region,
    }
}

struct BoundData {
    basic: BasicActions,
    sqrt_d1: f64,
    sqrt_d2: f64,
    k: f64,
}

fn bound_data(pair: &LambertPair, region: RegionClass, spec: &EnergySpec, params: &SystemParams) -> Result<BoundData> {
    if !(spec.energy < 0.0 && params.is_attractive()) {
        return Err(Error::OutOfDomain("bound-state Green function needs attractive E < 0".into()));
    }
    match region.tag {
        RegionTag::OnCaustic => return Err(Error::OnCaustic { margin: region.margin }),
        RegionTag::Forbidden => return Err(Error::Forbidden { margin: region.margin }),
        RegionTag::Allowed => {}
    }
    if !(pair.s > 0.0) {
        return Err(Error::Degenerate("s = 0: source point".into()));
    }
    if !(pair.alpha_minus > 0.0) {
        return Err(Error::Degenerate("alpha_- = 0: path through the force centre".into()));
    }
    let k = spec.bound_k()?;
    let basic = basic_actions(pair, spec, params)?;
    let vp = velocity(pair.alpha_plus, spec, params)?;
    let vm = velocity(pair.alpha_minus, spec, params)?;
    let d1 = vvpm_from_velocities(1, vp, vm, pair.s, params)?.d;
    let d2 = vvpm_from_velocities(2, vp, vm, pair.s, params)?.d;
    Ok(BoundData {
        basic,
        sqrt_d1: d1.abs().sqrt(),
        sqrt_d2: d2.abs().sqrt(),
        k,
    })
}

fn elementary_from(data: &BoundData, params: &SystemParams, loops: u32, damping: f64) -> Complex64 {
    let paths = four_paths_from(&data.basic, params.ndim);
    let amps = [data.sqrt_d1, data.sqrt_d2, data.sqrt_d1, data.sqrt_d2];
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..=loops {
        let weight = (-2.0 * PI * damping * j as f64).exp();
        for (path, amp) in paths.iter().zip(amps) {
            let q = path.with_loops(j, &data.basic, params.ndim);
            let phase = q.w / params.hbar - q.morse as f64 * PI / 2.0;
            total += Complex64::from_polar(amp * weight, phase);
        }
    }
    prefactor(params) * total
}

/// G_elem: the four elementary paths without repeated loops.
pub fn elementary_sum(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<Complex64> {
    let (pair, region) = setup(r_vec, rp_vec, spec, params)?;
    let data = bound_data(&pair, region, spec, params)?;
    Ok(elementary_from(&data, params, 0, 0.0))
}

/// Bound-state Green function in its two-term cosine form.
///
/// The overall constant is -i^{n-1}/(hbar (2 pi hbar)^{(n-1)/2}), which is the
/// value obtained by multiplying the elementary four-path sum with the loop
/// factor; it reproduces the exact propagator for n = 3.
pub fn green_sc_bound(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<FieldSample> {
    let (pair, region) = setup(r_vec, rp_vec, spec, params)?;
    let data = bound_data(&pair, region, spec, params)?;
    check_pole(data.k)?;
    let n1 = params.ndim as f64 - 1.0;
    let k = data.k;
    let hb = params.hbar;
    let w1 = data.basic.w_plus - data.basic.w_minus;
    let w2 = data.basic.w_plus + data.basic.w_minus;
    let c = -eighth_root(2 * (params.ndim as i64 - 1)) / (hb * (2.0 * PI * hb).powf(n1 / 2.0));
    let body = data.sqrt_d1 * (w1 / hb - PI * (n1 / 4.0 + k)).cos()
        + data.sqrt_d2 * (PI * (3.0 * n1 / 4.0 + k) - w2 / hb).sin();
    let value = c * (body / (PI * k).sin());
    Ok(sample(r_vec, rp_vec, spec, Method::Sc, value, region))
}

/// Explicit truncated sum over the four paths and j = 0..=j_max loops, each
/// loop damped by e^{-2 pi eta j} (equivalent to evaluating at k + i eta).
pub fn green_sc_bound_sum(
    r_vec: &[f64],
    rp_vec: &[f64],
    spec: &EnergySpec,
    params: &SystemParams,
    j_max: u32,
    eta: f64,
) -> Result<Complex64> {
    if !(eta >= 0.0) {
        return Err(Error::InvalidParams(format!("eta must be non-negative, got {eta}")));
    }
    let (pair, region) = setup(r_vec, rp_vec, spec, params)?;
    let data = bound_data(&pair, region, spec, params)?;
    Ok(elementary_from(&data, params, j_max, eta))
}

/// Closed product form G_elem x sum_j e^{2 pi i j (k + i eta)}.
pub fn green_sc_bound_product(
    r_vec: &[f64],
    rp_vec: &[f64],
    spec: &EnergySpec,
    params: &SystemParams,
    eta: f64,
) -> Result<Complex64> {
    let (pair, region) = setup(r_vec, rp_vec, spec, params)?;
    let data = bound_data(&pair, region, spec, params)?;
    let elem = elementary_from(&data, params, 0, 0.0);
    if eta == 0.0 {
        check_pole(data.k)?;
        let (w2pi, _) = round_trip(spec, params)?;
        return Ok(elem * loop_factor(w2pi, params.ndim, params.hbar)?);
    }
    Ok(elem * loop_factor_complex(Complex64::new(data.k, eta)))
}

/// Attractive E > 0: direct and focus-reflected hyperbolic paths.
pub fn green_sc_scatter_attractive(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<FieldSample> {
    if !(spec.energy > 0.0 && params.is_attractive()) {
        return Err(Error::OutOfDomain("attractive scattering needs E > 0".into()));
    }
    let (pair, region) = setup(r_vec, rp_vec, spec, params)?;
    if !(pair.s > 0.0) {
        return Err(Error::Degenerate("s = 0: source point".into()));
    }
    if !(pair.alpha_minus > 0.0) {
        return Err(Error::Degenerate("alpha_- = 0: path through the force centre".into()));
    }
    let wp = reduced_action_scatter_attractive(pair.alpha_plus, spec, params)?;
    let wm = reduced_action_scatter_attractive(pair.alpha_minus, spec, params)?;
    let vp = velocity_scatter(pair.alpha_plus, spec, params)?;
    let vm = velocity_scatter(pair.alpha_minus, spec, params)?;
    let d1 = vvpm_from_velocities(1, vp, vm, pair.s, params)?.d.abs().sqrt();
    let d2 = vvpm_from_velocities(2, vp, vm, pair.s, params)?.d.abs().sqrt();
    let hb = params.hbar;
    let m2 = (params.ndim as f64 - 2.0) * PI / 2.0;
    let value = scatter_prefactor(params)
        * (Complex64::from_polar(d1, (wp - wm) / hb) + Complex64::from_polar(d2, (wp + wm) / hb - m2));
    Ok(sample(r_vec, rp_vec, spec, Method::Sc, value, region))
}

/// Repulsive E > 0 (experimental): direct path plus the path reflected at
/// the caustic alpha = 4|a|, which carries Morse index 1. When the source
/// side lies in the forbidden zone (alpha_- < 4|a| < alpha_+) both paths are
/// continued with the decaying branch of W_-.
pub fn green_sc_scatter_repulsive(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<FieldSample> {
    if !(spec.energy > 0.0 && !params.is_attractive()) {
        return Err(Error::OutOfDomain("repulsive scattering needs E > 0 and a repulsive interaction".into()));
    }
    let (pair, region) = setup(r_vec, rp_vec, spec, params)?;
    if !(pair.s > 0.0) {
        return Err(Error::Degenerate("s = 0: source point".into()));
    }
    let edge = 4.0 * spec.a.abs();
    let hb = params.hbar;
    let p = params.half_transverse();
    let value = match region.tag {
        RegionTag::OnCaustic => return Err(Error::OnCaustic { margin: region.margin }),
        RegionTag::Allowed => {
            let wp = reduced_action_scatter_repulsive(pair.alpha_plus, spec, params)?;
            let wm = reduced_action_scatter_repulsive(pair.alpha_minus, spec, params)?;
            let vp = velocity_scatter(pair.alpha_plus, spec, params)?;
            let vm = velocity_scatter(pair.alpha_minus, spec, params)?;
            let d1 = vvpm_from_velocities(1, vp, vm, pair.s, params)?.d.abs().sqrt();
            let d2 = vvpm_from_velocities(2, vp, vm, pair.s, params)?.d.abs().sqrt();
            scatter_prefactor(params)
                * (Complex64::from_polar(d1, (wp - wm) / hb) + Complex64::from_polar(d2, (wp + wm) / hb - PI / 2.0))
        }
        RegionTag::Forbidden => {
            if pair.alpha_plus <= edge {
                return Err(Error::Forbidden { margin: region.margin });
            }
            let wp = reduced_action_scatter_repulsive(pair.alpha_plus, spec, params)?;
            let branches = reduced_action_repulsive_forbidden(pair.alpha_minus, spec, params)?;
            let vp = Complex64::new(velocity_scatter(pair.alpha_plus, spec, params)?, 0.0);
            let vm = Complex64::new(
                0.0,
                (2.0 * spec.energy / params.mu).sqrt() * ((edge - pair.alpha_minus) / pair.alpha_minus).sqrt(),
            );
            let root = (vp * vm).sqrt();
            let scale = params.mu / (2.0 * pair.s);
            let amp1 = ((vp + vm) * scale).powf(p) / root;
            let amp2 = ((vp - vm) * scale).powf(p) / root;
            let w1 = wp - branches.growing();
            let w2 = wp + branches.decaying();
            let i = Complex64::i();
            scatter_prefactor(params) * (amp1 * (i * w1 / hb).exp() + amp2 * (i * w2 / hb - i * PI / 2.0).exp())
        }
    };
    Ok(sample(r_vec, rp_vec, spec, Method::Sc, value, region))
}

/// Bound problem with the observation point beyond the caustic: the two
/// paths through the tunnel with W_+ continued on its decaying branch.
pub fn green_sc_tunnel(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<FieldSample> {
    if !(spec.energy < 0.0 && params.is_attractive()) {
        return Err(Error::OutOfDomain("tunnel continuation needs attractive E < 0".into()));
    }
    let (pair, region) = setup(r_vec, rp_vec, spec, params)?;
    match region.tag {
        RegionTag::Forbidden => {}
        RegionTag::OnCaustic => return Err(Error::OnCaustic { margin: region.margin }),
        RegionTag::Allowed => {
            return Err(Error::OutOfDomain(format!(
                "point is classically allowed (margin {:.3e}); use green_sc_bound",
                region.margin
            )))
        }
    }
    if !(pair.s > 0.0) {
        return Err(Error::Degenerate("s = 0: source point".into()));
    }
    if !(pair.alpha_minus > 0.0) {
        return Err(Error::Degenerate("alpha_- = 0: path through the force centre".into()));
    }
    let edge = 4.0 * spec.a;
    if pair.alpha_minus >= edge {
        return Err(Error::OutOfDomain("both Lambert variables beyond the caustic".into()));
    }
    let k = spec.bound_k()?;
    check_pole(k)?;
    let (w2pi, _) = round_trip(spec, params)?;
    let glob = loop_factor(w2pi, params.ndim, params.hbar)?;
    let wp = reduced_action_bound_forbidden(pair.alpha_plus, spec, params)?.decaying();
    let wm = reduced_action_bound(pair.alpha_minus, spec, params)?;
    let vp = Complex64::new(
        0.0,
        (2.0 * spec.energy.abs() / params.mu).sqrt() * ((pair.alpha_plus - edge) / pair.alpha_plus).sqrt(),
    );
    let vm = Complex64::new(velocity(pair.alpha_minus, spec, params)?, 0.0);
    let p = params.half_transverse();
    let scale = params.mu / (2.0 * pair.s);
    let root = (vp * vm).sqrt();
    let amp1 = ((vp + vm) * scale).powf(p) / root;
    let amp2 = ((vm - vp) * scale).powf(p) / root;
    let i = Complex64::i();
    let hb = params.hbar;
    let m2 = (params.ndim as f64 - 2.0) * PI / 2.0;
    let body = amp1 * (i * (wp - wm) / hb).exp() + amp2 * (i * (wp + wm) / hb - i * m2).exp();
    let value = prefactor(params) * glob * body;
    Ok(sample(r_vec, rp_vec, spec, Method::Sc, value, region))
}

/// Picks the semiclassical form appropriate for the energy and region.
pub fn green_sc(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<FieldSample> {
    if spec.energy > 0.0 {
        return if params.is_attractive() {
            green_sc_scatter_attractive(r_vec, rp_vec, spec, params)
        } else {
            green_sc_scatter_repulsive(r_vec, rp_vec, spec, params)
        };
    }
    let (_, region) = setup(r_vec, rp_vec, spec, params)?;
    match region.tag {
        RegionTag::Allowed => green_sc_bound(r_vec, rp_vec, spec, params),
        RegionTag::Forbidden => green_sc_tunnel(r_vec, rp_vec, spec, params),
        RegionTag::OnCaustic => Err(Error::OnCaustic { margin: region.margin }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::energy_from_nu;

    #[test]
    fn loop_factor_examples() {
        let hb = 1.0;
        // k = 1/2 in n = 3: W_2pi = 2 pi (1/2 + 1)
        let half = loop_factor(2.0 * PI * 1.5, 3, hb).unwrap();
        assert!((half - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let quarter = loop_factor(2.0 * PI * 1.25, 3, hb).unwrap();
        assert!((quarter - Complex64::new(0.5, 0.5)).norm() < 1e-14);
        assert!(matches!(loop_factor(2.0 * PI * 3.0, 3, hb), Err(Error::Pole { k }) if k == 2.0));
    }

    #[test]
    fn complex_loop_factor_matches_cotangent() {
        for &k in &[0.1, 0.37, 2.8, 28.2] {
            let a = loop_factor_complex(Complex64::new(k, 0.0));
            let b = loop_factor(2.0 * PI * (k + 1.0), 3, 1.0).unwrap();
            assert!((a - b).norm() < 1e-11 * b.norm(), "k={k}");
        }
    }

    #[test]
    fn prefactor_n3_is_real() {
        let p = SystemParams::atomic(3).unwrap();
        let c = prefactor(&p);
        assert!((c.re + 1.0 / (2.0 * PI)).abs() < 1e-16 && c.im == 0.0);
        assert_eq!(scatter_prefactor(&p), c);
    }

    #[test]
    fn cosine_form_equals_product_form() {
        for n in 2..6 {
            let p = SystemParams::atomic(n).unwrap();
            let s = energy_from_nu(6.3, &p).unwrap();
            let r = [vec![20.0, 7.0], vec![0.0; n - 2]].concat();
            let rp = [vec![-9.0, 11.0], vec![0.0; n - 2]].concat();
            let a = green_sc_bound(&r, &rp, &s, &p).unwrap().value;
            let b = green_sc_bound_product(&r, &rp, &s, &p, 0.0).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm(), "n={n}: {a} vs {b}");
            if n % 2 == 1 {
                assert!(a.im.abs() <= 1e-10 * a.norm());
            }
        }
    }

    #[test]
    fn zero_loops_is_elementary() {
        let p = SystemParams::atomic(3).unwrap();
        let s = energy_from_nu(4.6, &p).unwrap();
        let (r, rp) = ([5.0, 3.0, -1.0], [-4.0, 2.0, 0.5]);
        let a = green_sc_bound_sum(&r, &rp, &s, &p, 0, 0.0).unwrap();
        let b = elementary_sum(&r, &rp, &s, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn near_pole_guard() {
        let p = SystemParams::atomic(3).unwrap();
        let s = energy_from_nu(5.0 + 1e-11, &p).unwrap();
        let e = green_sc_bound(&[3.0, 1.0, 0.0], &[-2.0, 1.0, 0.0], &s, &p);
        assert!(matches!(e, Err(Error::Pole { .. })));
    }

    #[test]
    fn region_errors() {
        let p = SystemParams::atomic(3).unwrap();
        let s = energy_from_nu(2.3, &p).unwrap();
        let far = [30.0, 0.0, 0.0];
        let near = [1.0, 1.0, 0.0];
        assert!(matches!(green_sc_bound(&far, &near, &s, &p), Err(Error::Forbidden { .. })));
        assert!(green_sc_tunnel(&far, &near, &s, &p).is_ok());
        assert!(green_sc_tunnel(&near, &[0.5, 0.0, 0.0], &s, &p).is_err());
    }

    #[test]
    fn scattering_is_complex_and_reciprocal() {
        let p = SystemParams::atomic(3).unwrap();
        let s = EnergySpec::from_energy(0.2, &p).unwrap();
        let (r, rp) = ([7.0, 2.0, 1.0], [-3.0, 4.0, 0.0]);
        let a = green_sc_scatter_attractive(&r, &rp, &s, &p).unwrap().value;
        let b = green_sc_scatter_attractive(&rp, &r, &s, &p).unwrap().value;
        assert!(a.im.abs() > 1e-6 * a.norm());
        assert!((a - b).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn repulsive_regions() {
        let p = SystemParams::atomic(3).unwrap().repulsive();
        let s = EnergySpec::from_energy(0.5, &p).unwrap();
        let allowed = green_sc_scatter_repulsive(&[8.0, 0.0, 0.0], &[0.0, 9.0, 0.0], &s, &p).unwrap();
        assert_eq!(allowed.region.tag, RegionTag::Allowed);
        let tunnel = green_sc_scatter_repulsive(&[9.0, 0.0, 0.0], &[-1.0, 0.5, 0.0], &s, &p).unwrap();
        assert_eq!(tunnel.region.tag, RegionTag::Forbidden);
        assert!(tunnel.value.norm().is_finite());
    }
}
