//! Reduction of two position vectors to the Lambert variables
//! alpha_pm = r + r' +- s, region classification, and the anomaly-angle
//! form of the direct-path action.

use crate::error::{Error, Result};
use crate::model::{EnergySpec, SystemParams};

/// Default relative width of the caustic band, |alpha - 4a| <= tol * 4a.
pub const CAUSTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertPair {
    pub r: f64,
    pub rp: f64,
    pub s: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl LambertPair {
    /// Builds the pair from the three distances; they must form a triangle
    /// (up to rounding).
    pub fn from_distances(r: f64, rp: f64, s: f64) -> Result<Self> {
        if !(r >= 0.0 && rp >= 0.0 && s >= 0.0) || !(r + rp + s).is_finite() {
            return Err(Error::InvalidParams(format!(
                "distances must be finite and non-negative: r={r}, r'={rp}, s={s}"
            )));
        }
        let slack = 1e-12 * (r + rp + s);
        if s > r + rp + slack || r > rp + s + slack || rp > r + s + slack {
            return Err(Error::InvalidParams(format!(
                "r={r}, r'={rp}, s={s} violate the triangle inequality"
            )));
        }
        Ok(Self {
            r,
            rp,
            s,
            alpha_plus: r + rp + s,
            alpha_minus: (r + rp - s).max(0.0),
        })
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn lambert_variables(r_vec: &[f64], rp_vec: &[f64]) -> Result<LambertPair> {
    if r_vec.len() != rp_vec.len() {
        return Err(Error::DimensionMismatch {
            expected: rp_vec.len(),
            got: r_vec.len(),
        });
    }
    if r_vec.is_empty() {
        return Err(Error::InvalidParams("empty position vectors".into()));
    }
    if r_vec.iter().chain(rp_vec).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams("non-finite coordinate".into()));
    }
    let r = norm(r_vec);
    let rp = norm(rp_vec);
    let s = r_vec
        .iter()
        .zip(rp_vec)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(LambertPair {
        r,
        rp,
        s,
        alpha_plus: r + rp + s,
        alpha_minus: (r + rp - s).max(0.0),
    })
}

/// Same as [`lambert_variables`] but also checks both vectors against `ndim`.
pub fn lambert_variables_nd(r_vec: &[f64], rp_vec: &[f64], ndim: usize) -> Result<LambertPair> {
    for v in [r_vec, rp_vec] {
        if v.len() != ndim {
            return Err(Error::DimensionMismatch {
                expected: ndim,
                got: v.len(),
            });
        }
    }
    lambert_variables(r_vec, rp_vec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionTag {
    Allowed,
    OnCaustic,
    Forbidden,
}

impl RegionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionTag::Allowed => "Allowed",
            RegionTag::OnCaustic => "OnCaustic",
            RegionTag::Forbidden => "Forbidden",
        }
    }
}

/// Region tag plus the signed relative distance to the caustic (positive
/// on the allowed side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionClass {
    pub tag: RegionTag,
    pub margin: f64,
}

pub fn classify_region(pair: &LambertPair, spec: &EnergySpec, attractive: bool) -> RegionClass {
    classify_region_with_tol(pair, spec, attractive, CAUSTIC_TOL)
}

pub fn classify_region_with_tol(
    pair: &LambertPair,
    spec: &EnergySpec,
    attractive: bool,
    tol: f64,
) -> RegionClass {
    let edge = 4.0 * spec.a.abs();
    let by_margin = |margin: f64| {
        let tag = if margin.abs() <= tol {
            RegionTag::OnCaustic
        } else if margin > 0.0 {
            RegionTag::Allowed
        } else {
            RegionTag::Forbidden
        };
        RegionClass { tag, margin }
    };
    match (spec.energy < 0.0, attractive) {
        (true, true) => by_margin((edge - pair.alpha_plus) / edge),
        (false, false) => by_margin((pair.alpha_minus - edge) / edge),
        (false, true) => RegionClass {
            tag: RegionTag::Allowed,
            margin: f64::INFINITY,
        },
        (true, false) => RegionClass {
            tag: RegionTag::Forbidden,
            margin: f64::NEG_INFINITY,
        },
    }
}

/// Principal-branch angles with sin^2(gamma/2) = alpha_+/4a and
/// sin^2(delta/2) = alpha_-/4a, 0 <= delta <= gamma <= pi.
pub fn anomaly_angles(pair: &LambertPair, a: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) {
        return Err(Error::InvalidParams(format!("a must be positive, got {a}")));
    }
    let edge = 4.0 * a;
    let margin = (edge - pair.alpha_plus) / edge;
    if margin < -CAUSTIC_TOL {
        return Err(Error::Forbidden { margin });
    }
    let angle = |alpha: f64| 2.0 * (alpha / edge).clamp(0.0, 1.0).sqrt().asin();
    Ok((angle(pair.alpha_plus), angle(pair.alpha_minus)))
}

/// sqrt(mu a kc) (gamma + sin gamma - delta - sin delta)
pub fn action_via_anomalies(gamma: f64, delta: f64, a: f64, params: &SystemParams) -> f64 {
    (params.mu * a * params.kc).sqrt() * (gamma + gamma.sin() - delta - delta.sin())
}
