//! Closed-form reduced actions, travel times and velocities of the
//! one-dimensional projected Kepler problem, for every energy regime.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{LambertPair, CAUSTIC_TOL};
use crate::model::{EnergySpec, SystemParams};
use crate::vvpm::morse_index;

fn require_bound(spec: &EnergySpec, params: &SystemParams) -> Result<()> {
    if spec.energy >= 0.0 {
        return Err(Error::OutOfDomain(format!("bound form needs E < 0, got {}", spec.energy)));
    }
    if !params.is_attractive() {
        return Err(Error::OutOfDomain("bound form needs an attractive interaction".into()));
    }
    Ok(())
}

fn require_scatter(spec: &EnergySpec) -> Result<()> {
    if spec.energy <= 0.0 {
        return Err(Error::OutOfDomain(format!("scattering form needs E > 0, got {}", spec.energy)));
    }
    Ok(())
}

/// Clamps alpha into [0, 4a] allowing for rounding at the turning point.
fn bound_alpha(alpha: f64, a: f64) -> Result<f64> {
    let edge = 4.0 * a;
    if !(alpha >= 0.0) || alpha > edge * (1.0 + CAUSTIC_TOL) {
        return Err(Error::OutOfDomain(format!("alpha = {alpha} outside [0, 4a = {edge}]")));
    }
    Ok(alpha.min(edge))
}

/// atan(x) - x/(1+x^2); vanishes like (2/3)x^3 at the turning point.
pub(crate) fn tan_deficit(x: f64) -> f64 {
    if x < 0.1 {
        x * x * x * tan_deficit_reduced(x)
    } else {
        x.atan() - 1.0 / (x + 1.0 / x)
    }
}

/// tan_deficit(x)/x^3, smooth at x = 0.
pub(crate) fn tan_deficit_reduced(x: f64) -> f64 {
    if x < 0.1 {
        let x2 = x * x;
        let mut sum = 0.0;
        let mut pow = 1.0;
        for k in 1..=12 {
            let c = 2.0 * k as f64 / (2.0 * k as f64 + 1.0);
            sum += if k % 2 == 1 { c * pow } else { -c * pow };
            pow *= x2;
        }
        sum
    } else {
        tan_deficit(x) / (x * x * x)
    }
}

/// y/(1-y^2) - atanh(y), 0 <= y < 1; the continuation of `tan_deficit`
/// through x = iy.
pub(crate) fn tanh_excess(y: f64) -> f64 {
    if y < 0.1 {
        y * y * y * tanh_excess_reduced(y)
    } else {
        y / (1.0 - y * y) - y.atanh()
    }
}

pub(crate) fn tanh_excess_reduced(y: f64) -> f64 {
    if y < 0.1 {
        let y2 = y * y;
        let mut sum = 0.0;
        let mut pow = 1.0;
        for k in 1..=12 {
            sum += 2.0 * k as f64 / (2.0 * k as f64 + 1.0) * pow;
            pow *= y2;
        }
        sum
    } else {
        tanh_excess(y) / (y * y * y)
    }
}

/// gamma - sin(gamma) without cancellation at small gamma.
fn gamma_minus_sin(g: f64) -> f64 {
    if g < 1e-2 {
        let g2 = g * g;
        g * g2 / 6.0 * (1.0 - g2 / 20.0 * (1.0 - g2 / 42.0 * (1.0 - g2 / 72.0)))
    } else {
        g - g.sin()
    }
}

/// Bound-state speed v = sqrt(2|E|/mu) sqrt((4a - alpha)/alpha), 0 < alpha < 4a.
pub fn velocity(alpha: f64, spec: &EnergySpec, params: &SystemParams) -> Result<f64> {
    require_bound(spec, params)?;
    let edge = 4.0 * spec.a;
    if alpha >= edge {
        return Err(Error::OutOfDomain(format!(
            "alpha = {alpha} at or beyond the turning point 4a = {edge}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "alpha = {alpha}: the velocity diverges at the force centre"
        )));
    }
    Ok((2.0 * spec.energy.abs() / params.mu).sqrt() * ((edge - alpha) / alpha).sqrt())
}

/// E > 0 speed; attractive uses (4a + alpha)/alpha under the root,
/// repulsive (alpha - 4|a|)/alpha on the allowed side.
pub fn velocity_scatter(alpha: f64, spec: &EnergySpec, params: &SystemParams) -> Result<f64> {
    require_scatter(spec)?;
    if !(alpha > 0.0) {
        return Err(Error::OutOfDomain(format!("alpha = {alpha} must be positive")));
    }
    let edge = 4.0 * spec.a;
    let ratio = if params.is_attractive() {
        (edge + alpha) / alpha
    } else {
        if alpha <= edge {
            return Err(Error::OutOfDomain(format!(
                "alpha = {alpha} inside the repulsive turning point 4|a| = {edge}"
            )));
        }
        (alpha - edge) / alpha
    };
    Ok((2.0 * spec.energy / params.mu).sqrt() * ratio.sqrt())
}

/// W(alpha) = sqrt(kc mu/a) (sqrt((4a-alpha) alpha)/2 + 2a atan sqrt(alpha/(4a-alpha)))
pub fn reduced_action_bound(alpha: f64, spec: &EnergySpec, params: &SystemParams) -> Result<f64> {
    require_bound(spec, params)?;
    let a = spec.a;
    let alpha = bound_alpha(alpha, a)?;
    let rest = 4.0 * a - alpha;
    Ok((params.kc * params.mu / a).sqrt()
        * (0.5 * (rest * alpha).sqrt() + 2.0 * a * alpha.sqrt().atan2(rest.sqrt())))
}

/// t(alpha) = sqrt(mu a^3/kc)(gamma - sin gamma), sin^2(gamma/2) = alpha/4a.
pub fn travel_time_bound(alpha: f64, spec: &EnergySpec, params: &SystemParams) -> Result<f64> {
    require_bound(spec, params)?;
    let a = spec.a;
    let alpha = bound_alpha(alpha, a)?;
    let gamma = 2.0 * (alpha / (4.0 * a)).sqrt().min(1.0).asin();
    Ok((params.mu * a.powi(3) / params.kc).sqrt() * gamma_minus_sin(gamma))
}

/// Action and period of the closed orbit, (2 pi sqrt(mu a kc), 2 pi sqrt(mu a^3/kc)).
pub fn round_trip(spec: &EnergySpec, params: &SystemParams) -> Result<(f64, f64)> {
    require_bound(spec, params)?;
    let a = spec.a;
    Ok((
        2.0 * PI * (params.mu * a * params.kc).sqrt(),
        2.0 * PI * (params.mu * a.powi(3) / params.kc).sqrt(),
    ))
}

/// Single-leg actions and times of the projected bound problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicActions {
    pub w_plus: f64,
    pub w_minus: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    pub w_2pi: f64,
    pub t_2pi: f64,
}

pub fn basic_actions(pair: &LambertPair, spec: &EnergySpec, params: &SystemParams) -> Result<BasicActions> {
    require_bound(spec, params)?;
    let edge = 4.0 * spec.a;
    let margin = (edge - pair.alpha_plus) / edge;
    if margin < -CAUSTIC_TOL {
        return Err(Error::Forbidden { margin });
    }
    let (w_2pi, t_2pi) = round_trip(spec, params)?;
    Ok(BasicActions {
        w_plus: reduced_action_bound(pair.alpha_plus, spec, params)?,
        w_minus: reduced_action_bound(pair.alpha_minus, spec, params)?,
        t_plus: travel_time_bound(pair.alpha_plus, spec, params)?,
        t_minus: travel_time_bound(pair.alpha_minus, spec, params)?,
        w_2pi,
        t_2pi,
    })
}

/// Action, travel time and Morse index of one elementary path, optionally
/// extended by `loops` full round trips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathQuantity {
    pub path_id: u8,
    pub w: f64,
    pub t: f64,
    pub morse: u32,
    pub loops: u32,
}

impl PathQuantity {
    pub fn with_loops(&self, j: u32, basic: &BasicActions, ndim: usize) -> PathQuantity {
        let extra = j as f64;
        PathQuantity {
            path_id: self.path_id,
            w: self.w + extra * basic.w_2pi,
            t: self.t + extra * basic.t_2pi,
            morse: self.morse + j * 2 * (ndim as u32 - 1),
            loops: self.loops + j,
        }
    }
}

/// The direct, focus-reflected, doubly reflected and caustic-reflected paths.
///
/// Paths 3 and 4 are the complements of paths 1 and 2 in the closed orbit:
/// W3 = W_2pi - W1, W4 = W_2pi - W2 (and likewise for the times).
pub fn four_paths_from(basic: &BasicActions, ndim: usize) -> [PathQuantity; 4] {
    let w1 = basic.w_plus - basic.w_minus;
    let w2 = basic.w_plus + basic.w_minus;
    let t1 = basic.t_plus - basic.t_minus;
    let t2 = basic.t_plus + basic.t_minus;
    let mk = |id: u8, w: f64, t: f64| PathQuantity {
        path_id: id,
        w,
        t,
        morse: morse_index(id, ndim, 0).expect("path ids 1..=4 are valid"),
        loops: 0,
    };
    [
        mk(1, w1, t1),
        mk(2, w2, t2),
        mk(3, basic.w_2pi - w1, basic.t_2pi - t1),
        mk(4, basic.w_2pi - w2, basic.t_2pi - t2),
    ]
}

pub fn four_paths(pair: &LambertPair, spec: &EnergySpec, params: &SystemParams) -> Result<[PathQuantity; 4]> {
    let basic = basic_actions(pair, spec, params)?;
    Ok(four_paths_from(&basic, params.ndim))
}

/// Attractive E > 0 action,
/// sqrt(kc mu/a)(sqrt((4a+alpha) alpha)/2 + 2a log((sqrt(alpha) + sqrt(4a+alpha))/sqrt(4a))).
pub fn reduced_action_scatter_attractive(alpha: f64, spec: &EnergySpec, params: &SystemParams) -> Result<f64> {
    require_scatter(spec)?;
    if !(alpha >= 0.0) {
        return Err(Error::OutOfDomain(format!("alpha = {alpha} must be non-negative")));
    }
    let a = spec.a;
    Ok((params.kc * params.mu / a).sqrt()
        * (0.5 * ((4.0 * a + alpha) * alpha).sqrt() + 2.0 * a * (alpha / (4.0 * a)).sqrt().asinh()))
}

/// Repulsive E > 0 action on the allowed side alpha >= 4|a|, anchored to
/// vanish at the turning point.
pub fn reduced_action_scatter_repulsive(alpha: f64, spec: &EnergySpec, params: &SystemParams) -> Result<f64> {
    require_scatter(spec)?;
    let a = spec.a.abs();
    let edge = 4.0 * a;
    if !(alpha >= edge * (1.0 - CAUSTIC_TOL)) {
        return Err(Error::OutOfDomain(format!(
            "alpha = {alpha} below the repulsive turning point 4|a| = {edge}; use the forbidden form"
        )));
    }
    let y = ((alpha - edge).max(0.0) / alpha).sqrt();
    Ok((params.kc * params.mu / a).sqrt() * 2.0 * a * tanh_excess(y))
}

/// Two conjugate continuations of an action into a forbidden interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBranches {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl ActionBranches {
    /// The branch with non-negative imaginary part, for which e^{iW/hbar} decays.
    pub fn decaying(&self) -> Complex64 {
        if self.plus.im >= 0.0 {
            self.plus
        } else {
            self.minus
        }
    }

    pub fn growing(&self) -> Complex64 {
        if self.plus.im >= 0.0 {
            self.minus
        } else {
            self.plus
        }
    }
}

/// Repulsive E > 0, 0 <= alpha_- < 4|a|:
/// +-i sqrt(kc mu/|a|)(-pi|a| + sqrt((4|a|-alpha) alpha)/2 + 2|a| atan sqrt(alpha/(4|a|-alpha))).
pub fn reduced_action_repulsive_forbidden(
    alpha_minus: f64,
    spec: &EnergySpec,
    params: &SystemParams,
) -> Result<ActionBranches> {
    require_scatter(spec)?;
    let a = spec.a.abs();
    let edge = 4.0 * a;
    if !(alpha_minus >= 0.0) || alpha_minus > edge * (1.0 + CAUSTIC_TOL) {
        return Err(Error::OutOfDomain(format!(
            "alpha_- = {alpha_minus} outside the forbidden interval [0, 4|a| = {edge})"
        )));
    }
    let alpha = alpha_minus.min(edge);
    let x = if alpha == 0.0 {
        f64::INFINITY
    } else {
        ((edge - alpha) / alpha).sqrt()
    };
    let body = -(params.kc * params.mu / a).sqrt() * 2.0 * a * tan_deficit(x);
    Ok(ActionBranches {
        plus: Complex64::new(0.0, body),
        minus: Complex64::new(0.0, -body),
    })
}

/// Bound-state W_+ continued into the tunnel alpha_+ > 4a:
/// sqrt(kc mu/a)(a pi +- iX); `plus` carries +iX with X >= 0.
pub fn reduced_action_bound_forbidden(
    alpha_plus: f64,
    spec: &EnergySpec,
    params: &SystemParams,
) -> Result<ActionBranches> {
    require_bound(spec, params)?;
    let a = spec.a;
    let edge = 4.0 * a;
    if !(alpha_plus > edge) {
        return Err(Error::OutOfDomain(format!(
            "alpha_+ = {alpha_plus} not beyond the caustic 4a = {edge}; use the bound form"
        )));
    }
    let scale = (params.kc * params.mu / a).sqrt();
    let re = scale * a * PI;
    let im = scale * 2.0 * a * tanh_excess(((alpha_plus - edge) / alpha_plus).sqrt());
    Ok(ActionBranches {
        plus: Complex64::new(re, im),
        minus: Complex64::new(re, -im),
    })
}

/// Kepler transfer time between eccentric anomalies xi_p and xi.
pub fn kepler_transfer_time(xi: f64, xi_p: f64, eps: f64, spec: &EnergySpec, params: &SystemParams) -> Result<f64> {
    require_bound(spec, params)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::OutOfDomain(format!("eccentricity {eps} outside [0, 1)")));
    }
    Ok((params.mu * spec.a.powi(3) / params.kc).sqrt() * (xi - eps * xi.sin() - xi_p + eps * xi_p.sin()))
}
