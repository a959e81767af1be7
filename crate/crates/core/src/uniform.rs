//! Airy functions and the uniform approximation that replaces the
//! two-saddle stationary-phase result near the caustic alpha_+ = 4a (n = 3).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::actions::{reduced_action_bound, round_trip, tan_deficit_reduced, tanh_excess_reduced, velocity};
use crate::error::{Error, Result};
use crate::geometry::lambert_variables_nd;
use crate::model::{EnergySpec, SystemParams};
use crate::semiclassical::{loop_factor, prefactor, FieldSample, Method, POLE_GUARD};

const AI0: f64 = 0.355_028_053_887_817_239_260;
const AIP0: f64 = 0.258_819_403_792_806_798_405;
const SERIES_EDGE: f64 = 6.0;

fn airy_maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut g, mut fp, mut gp) = (1.0, x, 0.0, 1.0);
    let (mut tf, mut tg, mut tfp, mut tgp) = (1.0, x, x * x / 2.0, 1.0);
    fp += tfp;
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        tf *= x3 / ((k3 - 1.0) * k3);
        tg *= x3 / (k3 * (k3 + 1.0));
        tgp *= x3 / ((k3 - 2.0) * k3);
        f += tf;
        g += tg;
        gp += tgp;
        if k >= 2 {
            tfp *= x3 / ((k3 - 3.0) * (k3 - 1.0));
            fp += tfp;
        }
        let small = |t: f64, s: f64| t.abs() <= 1e-18 * s.abs();
        if k > 2 && small(tf, f) && small(tg, g) && small(tfp, fp) && small(tgp, gp) {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

/// Coefficients u_k, v_k of the large-argument expansions.
fn asymptotic_coefficients() -> ([f64; 40], [f64; 40]) {
    let mut u = [0.0; 40];
    let mut v = [0.0; 40];
    u[0] = 1.0;
    v[0] = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / (216.0 * kf * (2.0 * kf - 1.0));
        v[k] = -u[k] * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
    }
    (u, v)
}

/// Sum of sign(k) c[k] z^-k over k = start, start+step, ..., truncated at
/// the smallest term.
fn truncated_series(c: &[f64], z: f64, start: usize, step: usize, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for (n, k) in (start..c.len()).step_by(step).enumerate() {
        let sign = if alternate && n % 2 == 1 { -1.0 } else { 1.0 };
        let term = sign * c[k] / z.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// (Ai(x), Ai'(x)).
pub fn airy(x: f64) -> (f64, f64) {
    if x.abs() <= SERIES_EDGE {
        return airy_maclaurin(x);
    }
    let (u, v) = asymptotic_coefficients();
    let z = x.abs();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let q = z.powf(0.25);
    if x > 0.0 {
        let su = truncated_series(&u, -zeta, 0, 1, false);
        let sv = truncated_series(&v, -zeta, 0, 1, false);
        let e = (-zeta).exp() / (2.0 * PI.sqrt());
        (e * su / q, -e * q * sv)
    } else {
        let theta = zeta - PI / 4.0;
        let (s, c) = theta.sin_cos();
        let pu = truncated_series(&u, zeta, 0, 2, true);
        let qu = truncated_series(&u, zeta, 1, 2, true);
        let pv = truncated_series(&v, zeta, 0, 2, true);
        let qv = truncated_series(&v, zeta, 1, 2, true);
        let sp = PI.sqrt();
        ((c * pu + s * qu) / (sp * q), q / sp * (s * pv - c * qv))
    }
}

pub fn airy_ai(x: f64) -> f64 {
    airy(x).0
}

pub fn airy_ai_prime(x: f64) -> f64 {
    airy(x).1
}

/// Parameters of G = e^{i xi}/(2 hbar^2 sqrt(pi)) (d0 Ai(-zeta) - i d1 Ai'(-zeta)).
///
/// `xi` is the common phase W_2pi/(2 hbar) of the two coalescing pairs;
/// `d0`, `d1` absorb the loop factor and the pair phases e^{-+i W_-/hbar}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformInputs {
    pub xi: f64,
    pub zeta: f64,
    pub d0: Complex64,
    pub d1: Complex64,
}

/// zeta and the smooth ratio zeta^{1/4}/sqrt(|v_+|) for a given alpha_+.
pub(crate) fn caustic_variables(alpha_plus: f64, spec: &EnergySpec, params: &SystemParams) -> (f64, f64) {
    let a = spec.a;
    let edge = 4.0 * a;
    let root = (params.kc * params.mu * a).sqrt();
    let (sign, reduced, x) = if alpha_plus <= edge {
        let x = ((edge - alpha_plus) / alpha_plus).sqrt();
        (1.0, tan_deficit_reduced(x), x)
    } else {
        let y = ((alpha_plus - edge) / alpha_plus).sqrt();
        (-1.0, tanh_excess_reduced(y), y)
    };
    // (3/2) * (2 sqrt(kc mu a) x^3 reduced) / hbar = zeta^{3/2}
    let core = 3.0 * root * reduced / params.hbar;
    let zeta = sign * (core * x * x * x).powf(2.0 / 3.0);
    let ratio = core.powf(1.0 / 6.0) / (2.0 * spec.energy.abs() / params.mu).powf(0.25);
    (zeta, ratio)
}

pub fn uniform_inputs(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<UniformInputs> {
    if params.ndim != 3 {
        return Err(Error::UnsupportedDimension(params.ndim));
    }
    if !(spec.energy < 0.0 && params.is_attractive()) {
        return Err(Error::OutOfDomain("uniform approximation needs attractive E < 0".into()));
    }
    let pair = lambert_variables_nd(r_vec, rp_vec, params.ndim)?;
    if !(pair.s > 0.0) {
        return Err(Error::Degenerate("s = 0: source point".into()));
    }
    if !(pair.alpha_minus > 0.0) {
        return Err(Error::Degenerate("alpha_- = 0: path through the force centre".into()));
    }
    if pair.alpha_minus >= 4.0 * spec.a {
        return Err(Error::OutOfDomain("both Lambert variables beyond the caustic".into()));
    }
    let k = spec.bound_k()?;
    if (k - k.round()).abs() < POLE_GUARD {
        return Err(Error::Pole { k: k.round() });
    }
    let (w2pi, _) = round_trip(spec, params)?;
    let glob = loop_factor(w2pi, params.ndim, params.hbar)?;
    let hb = params.hbar;
    let (zeta, ratio) = caustic_variables(pair.alpha_plus, spec, params);
    let vm = velocity(pair.alpha_minus, spec, params)?;
    let wm = reduced_action_bound(pair.alpha_minus, spec, params)?;
    let amp_a = ratio * vm.sqrt();
    let amp_b = 1.0 / amp_a;
    let i = Complex64::i();
    let c = prefactor(params) * glob * Complex64::from_polar(PI.sqrt() * params.mu / pair.s, -PI / 4.0);
    let norm = c * (2.0 * hb * hb * PI.sqrt());
    let lo = Complex64::from_polar(1.0, -wm / hb);
    let hi = Complex64::from_polar(1.0, wm / hb);
    Ok(UniformInputs {
        xi: w2pi / (2.0 * hb),
        zeta,
        d0: norm * amp_a * (lo - i * hi),
        d1: norm * amp_b * (lo + i * hi),
    })
}

/// Airy uniform approximation, finite and smooth across the caustic.
pub fn green_uniform(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<FieldSample> {
    let inputs = uniform_inputs(r_vec, rp_vec, spec, params)?;
    let (ai, aip) = airy(-inputs.zeta);
    let hb = params.hbar;
    let value = Complex64::from_polar(1.0 / (2.0 * hb * hb * PI.sqrt()), inputs.xi)
        * (inputs.d0 * ai - Complex64::i() * inputs.d1 * aip);
    let pair = lambert_variables_nd(r_vec, rp_vec, params.ndim)?;
    let region = crate::geometry::classify_region(&pair, spec, true);
    Ok(FieldSample {
        r: r_vec.to_vec(),
        rp: rp_vec.to_vec(),
        energy: spec.energy,
        method: Method::Ua,
        value,
        region,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // (x, Ai, Ai') from 30-digit reference evaluations
    const TABLE: [(f64, f64, f64); 16] = [
        (-50.0, -0.16188142361232092392, 0.96898983727674908714),
        (-20.0, -0.17640612707798468959, 0.8928628567364712384),
        (-8.0, -0.052705050356386202622, 0.93556093819830655103),
        (-6.5, -0.23802030199711580359, -0.674952492513202173),
        (-6.0, -0.32914517362982310523, 0.34593548728134289493),
        (-5.9, -0.28512277955518009118, 0.5296285725630017807),
        (-3.0, -0.37881429367765807435, 0.31458376921659881365),
        (-1.0, 0.5355608832923521188, -0.010160567116645209395),
        (0.0, 0.35502805388781723926, -0.25881940379280679841),
        (1.0, 0.13529241631288141552, -0.15914744129679321279),
        (3.0, 0.0065911393574607191443, -0.011912976705951318474),
        (5.9, 0.000012747094509184476376, -0.000031481297117112737521),
        (6.0, 9.9476943602528895702e-6, -0.000024765200397034954754),
        (6.5, 2.7958823432049135855e-6, -7.2319314666017925598e-6),
        (8.0, 4.6922076160992316256e-8, -1.3414392979067865743e-7),
        (20.0, 1.6916728686705403136e-27, -7.5863916257483549605e-27),
    ];

    #[test]
    fn airy_reference_table() {
        for &(x, ai, aip) in &TABLE {
            let (a, b) = airy(x);
            assert!((a - ai).abs() <= 1e-10, "Ai({x}) = {a}, want {ai}");
            assert!((b - aip).abs() <= 1e-10, "Ai'({x}) = {b}, want {aip}");
        }
    }

    #[test]
    fn airy_origin() {
        assert!((airy_ai(0.0) - 0.3550280539).abs() < 1e-10);
        assert!((airy_ai_prime(0.0) + 0.2588194038).abs() < 1e-10);
    }

    #[test]
    fn airy_ode_by_differences() {
        let h = 1e-3;
        let mut x = -12.0;
        while x < 12.0 {
            let d2 = (airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h);
            let scale = 1.0 + x.abs();
            assert!((d2 - x * airy_ai(x)).abs() < 2e-4 * scale, "x = {x}");
            let dp = (airy_ai(x + h) - airy_ai(x - h)) / (2.0 * h);
            assert!((dp - airy_ai_prime(x)).abs() < 1e-6 * scale, "x = {x}");
            x += 0.173;
        }
    }

    #[test]
    fn rejects_other_dimensions() {
        let p = SystemParams::atomic(2).unwrap();
        let s = crate::model::energy_from_nu(5.3, &p).unwrap();
        assert!(matches!(
            green_uniform(&[1.0, 2.0], &[3.0, 0.0], &s, &p),
            Err(Error::UnsupportedDimension(2))
        ));
    }
}
