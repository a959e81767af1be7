//! Exact quantum reference for n = 3: radial Coulomb Green functions from
//! Numerov integration on a logarithmic mesh, the partial-wave sum, and the
//! closed l = 0 reduction G = -(1/2 pi s)(d/dx - d/dy) g_0(x, y) at
//! x = alpha_+/2, y = alpha_-/2, which needs no angular sum at all.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{classify_region, lambert_variables_nd, norm};
use crate::model::{EnergySpec, SystemParams};
use crate::semiclassical::{FieldSample, Method};

/// Legendre polynomial by upward recurrence.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=l {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Relative distance to the nearest eigenvalue of channel l below which
/// the radial Green function is reported as a pole.
pub const CHANNEL_POLE_TOL: f64 = 1e-9;

/// Uniform mesh in x = ln r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMesh {
    pub x_min: f64,
    pub h: f64,
    pub len: usize,
}

impl RadialMesh {
    pub fn new(r_min: f64, r_max: f64, h: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && h > 0.0) {
            return Err(Error::InvalidParams(format!(
                "mesh needs 0 < r_min < r_max and h > 0 (got {r_min}, {r_max}, {h})"
            )));
        }
        let len = ((r_max / r_min).ln() / h).ceil() as usize + 1;
        if len < 16 {
            return Err(Error::InvalidParams("radial mesh too coarse".into()));
        }
        Ok(Self {
            x_min: r_min.ln(),
            h,
            len,
        })
    }

    /// Mesh covering radii up to `r_extent` plus a decay margin beyond the
    /// outer turning point, with a step fine enough for the local wave number.
    pub fn for_energy(spec: &EnergySpec, params: &SystemParams, r_extent: f64, step: Option<f64>) -> Result<Self> {
        let kappa = (2.0 * params.mu * spec.energy.abs()).sqrt() / params.hbar;
        let nu = params.mu * params.kc / (params.hbar * params.hbar * kappa);
        let bohr = params.hbar * params.hbar / (params.mu * params.kc);
        let r_max = r_extent.max(2.0 * spec.a) * 1.01 + 40.0 / kappa;
        let h = step.unwrap_or_else(|| (0.03 / nu).min(2e-3));
        Self::new(1e-6 * bohr, r_max, h)
    }

    pub fn r(&self, i: usize) -> f64 {
        (self.x_min + i as f64 * self.h).exp()
    }

    pub fn r_min(&self) -> f64 {
        self.r(0)
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.len - 1)
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.r(i)).collect()
    }
}

/// A number stored as mant * e^{log} to survive exponential growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mant: f64,
    pub log: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        self.mant * self.log.exp()
    }
}

/// Numerov track y(x) with per-node log scales.
#[derive(Debug, Clone)]
struct Track {
    y: Vec<f64>,
    lg: Vec<f64>,
}

const RESCALE: f64 = 1e100;

fn numerov(f: &[f64], h: f64, y0: f64, y1: f64, forward: bool) -> Track {
    let n = f.len();
    let mut y = vec![0.0; n];
    let mut lg = vec![0.0; n];
    let c = h * h / 12.0;
    let idx = |k: usize| if forward { k } else { n - 1 - k };
    y[idx(0)] = y0;
    y[idx(1)] = y1;
    let (mut prev, mut cur, mut s) = (y0, y1, 0.0);
    for k in 1..n - 1 {
        let (im, i, ip) = (idx(k - 1), idx(k), idx(k + 1));
        let next = (2.0 * (1.0 + 5.0 * c * f[i]) * cur - (1.0 - c * f[im]) * prev) / (1.0 - c * f[ip]);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            s += RESCALE.ln();
        }
        y[ip] = cur;
        lg[ip] = s;
    }
    Track { y, lg }
}

impl Track {
    /// Value and x-derivative at fractional node position t, both relative
    /// to the scale e^{log}.
    fn interpolate(&self, t: f64, h: f64) -> (f64, f64, f64) {
        let n = self.y.len();
        let j0 = ((t.floor() as i64) - 2).clamp(0, n as i64 - 6) as usize;
        let base = self.lg[j0 + 2];
        let u = t - j0 as f64;
        let (mut val, mut der) = (0.0, 0.0);
        for a in 0..6 {
            let af = a as f64;
            let mut w = 1.0;
            for b in 0..6 {
                if b != a {
                    w *= (u - b as f64) / (af - b as f64);
                }
            }
            let mut dw = 0.0;
            for c in 0..6 {
                if c == a {
                    continue;
                }
                let mut p = 1.0 / (af - c as f64);
                for b in 0..6 {
                    if b != a && b != c {
                        p *= (u - b as f64) / (af - b as f64);
                    }
                }
                dw += p;
            }
            let ya = self.y[j0 + a] * (self.lg[j0 + a] - base).exp();
            val += w * ya;
            der += dw * ya;
        }
        (val, der / h, base)
    }

    /// Five-point x-derivative at a node, relative to the node's scale.
    fn node_derivative(&self, m: usize, h: f64) -> f64 {
        let at = |j: usize| self.y[j] * (self.lg[j] - self.lg[m]).exp();
        (at(m - 2) - 8.0 * at(m - 1) + 8.0 * at(m + 1) - at(m + 2)) / (12.0 * h)
    }
}

/// Regular and decaying solutions of the l-th radial equation at fixed E,
/// with their Wronskian.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub l: usize,
    pub energy: f64,
    pub mesh: RadialMesh,
    reg: Track,
    irr: Track,
    wronskian: Scaled,
    two_mu_hb2: f64,
    beta: f64,
}

fn check_oracle_domain(spec: &EnergySpec, params: &SystemParams) -> Result<()> {
    params.validate()?;
    if params.ndim != 3 {
        return Err(Error::UnsupportedDimension(params.ndim));
    }
    if !(spec.energy < 0.0 && params.is_attractive()) {
        return Err(Error::OutOfDomain("quantum reference implemented for attractive E < 0".into()));
    }
    Ok(())
}

/// Pole error when E sits on an eigenvalue of channel l (n = 3 spectrum,
/// principal quantum numbers N >= l + 1).
pub fn check_channel_pole(l: usize, spec: &EnergySpec, params: &SystemParams) -> Result<()> {
    let scale = params.mu * params.kc * params.kc / (2.0 * params.hbar * params.hbar);
    let nu = (scale / spec.energy.abs()).sqrt();
    let big_n = nu.round().max(l as f64 + 1.0);
    let e_n = -scale / (big_n * big_n);
    if ((spec.energy - e_n) / e_n).abs() < CHANNEL_POLE_TOL {
        return Err(Error::Pole { k: big_n - 1.0 });
    }
    Ok(())
}

impl RadialSolution {
    pub fn solve(l: usize, spec: &EnergySpec, params: &SystemParams, mesh: RadialMesh) -> Result<Self> {
        check_oracle_domain(spec, params)?;
        let two_mu_hb2 = 2.0 * params.mu / (params.hbar * params.hbar);
        let lh = l as f64 + 0.5;
        let e = spec.energy;
        let f: Vec<f64> = (0..mesh.len)
            .map(|i| {
                let r = mesh.r(i);
                r * r * two_mu_hb2 * (-params.kc / r - e) + lh * lh
            })
            .collect();
        let beta = params.mu * params.kc / (params.hbar * params.hbar * (l as f64 + 1.0));
        let (r0, r1) = (mesh.r(0), mesh.r(1));
        let reg = numerov(&f, mesh.h, 1.0 - beta * r0, (lh * mesh.h).exp() * (1.0 - beta * r1), true);

        let kappa = (two_mu_hb2 * e.abs()).sqrt();
        let nu = params.mu * params.kc / (params.hbar * params.hbar * kappa);
        let (rn, rn1) = (mesh.r(mesh.len - 1), mesh.r(mesh.len - 2));
        let irr = numerov(&f, mesh.h, 1.0, (kappa * (rn - rn1)).exp() * (rn1 / rn).powf(nu - 0.5), false);

        let mut sol = Self {
            l,
            energy: e,
            mesh,
            reg,
            irr,
            wronskian: Scaled { mant: 0.0, log: 0.0 },
            two_mu_hb2,
            beta,
        };
        let target = ((spec.a.ln() - mesh.x_min) / mesh.h).round() as i64;
        let m = target.clamp(2, mesh.len as i64 - 3) as usize;
        sol.wronskian = sol.wronskian_at(m)?;
        if sol.wronskian.mant == 0.0 || !sol.wronskian.mant.is_finite() {
            return Err(Error::Pole { k: f64::NAN });
        }
        Ok(sol)
    }

    /// W = y_reg y_irr' - y_reg' y_irr in x = ln r, equal to the r-Wronskian
    /// of u = r^{1/2} y.
    pub fn wronskian_at(&self, m: usize) -> Result<Scaled> {
        if m < 2 || m + 2 >= self.mesh.len {
            return Err(Error::OutOfDomain(format!("node {m} too close to the mesh ends")));
        }
        let h = self.mesh.h;
        let (yr, yi) = (self.reg.y[m], self.irr.y[m]);
        let mant = yr * self.irr.node_derivative(m, h) - self.reg.node_derivative(m, h) * yi;
        Ok(Scaled {
            mant,
            log: self.reg.lg[m] + self.irr.lg[m],
        })
    }

    pub fn wronskian(&self) -> Scaled {
        self.wronskian
    }

    pub fn grid(&self) -> Vec<f64> {
        self.mesh.radii()
    }

    fn position(&self, r: f64) -> f64 {
        (r.ln() - self.mesh.x_min) / self.mesh.h
    }

    /// (u, du/dr, log scale) of the regular solution.
    pub fn u_reg(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(r > 0.0) || r > self.mesh.r_max() {
            return Err(Error::OutOfDomain(format!("r = {r} outside the radial mesh")));
        }
        let r0 = self.mesh.r_min();
        if r < r0 {
            let lp = self.l as f64 + 1.0;
            let (y0, _, lg) = self.reg.interpolate(0.0, self.mesh.h);
            let u0 = r0.sqrt() * y0;
            let shape = |x: f64| x.powf(lp) * (1.0 - self.beta * x);
            let dshape = |x: f64| lp * x.powf(lp - 1.0) * (1.0 - self.beta * x) - self.beta * x.powf(lp);
            let c = u0 / shape(r0);
            return Ok((c * shape(r), c * dshape(r), lg));
        }
        let (y, yx, lg) = self.reg.interpolate(self.position(r), self.mesh.h);
        Ok((r.sqrt() * y, (0.5 * y + yx) / r.sqrt(), lg))
    }

    /// (u, du/dr, log scale) of the decaying solution.
    pub fn u_irr(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(r >= self.mesh.r_min()) || r > self.mesh.r_max() {
            return Err(Error::OutOfDomain(format!("r = {r} outside the radial mesh")));
        }
        let (y, yx, lg) = self.irr.interpolate(self.position(r), self.mesh.h);
        Ok((r.sqrt() * y, (0.5 * y + yx) / r.sqrt(), lg))
    }

    /// g_l(r_<, r_>) = (2 mu/hbar^2) u_reg(r_<) u_irr(r_>)/W.
    pub fn green(&self, r_small: f64, r_large: f64) -> Result<f64> {
        if !(r_small > 0.0 && r_small <= r_large) {
            return Err(Error::InvalidParams(format!(
                "need 0 < r_small <= r_large, got {r_small}, {r_large}"
            )));
        }
        let (ur, _, lr) = self.u_reg(r_small)?;
        let (ui, _, li) = self.u_irr(r_large)?;
        let w = self.wronskian;
        Ok(self.two_mu_hb2 * ur * ui / w.mant * (lr + li - w.log).exp())
    }
}

/// Radial Green function of channel l on a default mesh.
pub fn radial_green(l: usize, r_small: f64, r_large: f64, spec: &EnergySpec, params: &SystemParams) -> Result<f64> {
    check_oracle_domain(spec, params)?;
    check_channel_pole(l, spec, params)?;
    let mesh = RadialMesh::for_energy(spec, params, r_large, None)?;
    RadialSolution::solve(l, spec, params, mesh)?.green(r_small, r_large)
}

/// Shared radial solutions for one energy; each channel is solved at most
/// once, on first use, and may be read concurrently.
#[derive(Debug)]
pub struct QmOracle {
    spec: EnergySpec,
    params: SystemParams,
    mesh: RadialMesh,
    l_max: usize,
    tol: f64,
    channels: Vec<OnceLock<std::result::Result<RadialSolution, Error>>>,
}

/// Default relative tail tolerance of the partial-wave sum.
pub const PARTIAL_WAVE_TOL: f64 = 1e-6;

impl QmOracle {
    /// Oracle valid for points with |r|, |r'| and alpha_+/2 up to `r_extent`.
    pub fn new(spec: &EnergySpec, params: &SystemParams, r_extent: f64, l_max: usize) -> Result<Self> {
        Self::with_mesh(spec, params, RadialMesh::for_energy(spec, params, r_extent, None)?, l_max)
    }

    pub fn with_mesh(spec: &EnergySpec, params: &SystemParams, mesh: RadialMesh, l_max: usize) -> Result<Self> {
        check_oracle_domain(spec, params)?;
        check_channel_pole(0, spec, params)?;
        Ok(Self {
            spec: *spec,
            params: *params,
            mesh,
            l_max,
            tol: PARTIAL_WAVE_TOL,
            channels: (0..=l_max).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn mesh(&self) -> RadialMesh {
        self.mesh
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn radial(&self, l: usize) -> Result<&RadialSolution> {
        let cell = self
            .channels
            .get(l)
            .ok_or_else(|| Error::InvalidParams(format!("l = {l} exceeds l_max = {}", self.l_max)))?;
        cell.get_or_init(|| {
            check_channel_pole(l, &self.spec, &self.params)?;
            RadialSolution::solve(l, &self.spec, &self.params, self.mesh)
        })
        .as_ref()
        .map_err(Clone::clone)
    }

    fn region(&self, r_vec: &[f64], rp_vec: &[f64]) -> Result<crate::geometry::RegionClass> {
        let pair = lambert_variables_nd(r_vec, rp_vec, 3)?;
        Ok(classify_region(&pair, &self.spec, true))
    }

    /// Partial-wave sum up to l_max, with its estimated truncation tail.
    pub fn partial_wave_sum(&self, r_vec: &[f64], rp_vec: &[f64]) -> Result<(f64, f64)> {
        let pair = lambert_variables_nd(r_vec, rp_vec, 3)?;
        let (r, rp) = (norm(r_vec), norm(rp_vec));
        if !(r > 0.0 && rp > 0.0) {
            return Err(Error::Degenerate("partial waves need r, r' > 0".into()));
        }
        if !(pair.s > 0.0) {
            return Err(Error::Degenerate("s = 0: source point".into()));
        }
        let cos = (r_vec.iter().zip(rp_vec).map(|(a, b)| a * b).sum::<f64>() / (r * rp)).clamp(-1.0, 1.0);
        let (rs, rl) = if r <= rp { (r, rp) } else { (rp, r) };
        let mut sum = 0.0;
        let mut envelope = 0.0;
        let mut last = [0.0f64; 2];
        let (mut p0, mut p1) = (1.0, cos);
        for l in 0..=self.l_max {
            let pl = match l {
                0 => 1.0,
                1 => cos,
                _ => {
                    let lf = l as f64;
                    let p2 = ((2.0 * lf - 1.0) * cos * p1 - (lf - 1.0) * p0) / lf;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            let g = self.radial(l)?.green(rs, rl)?;
            let b = (2.0 * l as f64 + 1.0) / (4.0 * PI * r * rp) * g.abs();
            sum += (2.0 * l as f64 + 1.0) / (4.0 * PI * r * rp) * pl * g;
            envelope += b;
            last = [last[1], b];
        }
        let q = if last[0] > 0.0 { last[1] / last[0] } else { 0.0 };
        let tail = if q < 1.0 { last[1] * q / (1.0 - q) } else { f64::INFINITY };
        if tail > self.tol * envelope {
            return Err(Error::Unconverged {
                l_max: self.l_max,
                tail: tail / envelope,
            });
        }
        Ok((sum, tail))
    }

    pub fn green_partial_wave(&self, r_vec: &[f64], rp_vec: &[f64]) -> Result<FieldSample> {
        let (sum, _) = self.partial_wave_sum(r_vec, rp_vec)?;
        Ok(FieldSample {
            r: r_vec.to_vec(),
            rp: rp_vec.to_vec(),
            energy: self.spec.energy,
            method: Method::Qm,
            value: Complex64::new(sum, 0.0),
            region: self.region(r_vec, rp_vec)?,
        })
    }

    /// Full three-dimensional Green function from the l = 0 channel alone.
    pub fn closed_value(&self, r_vec: &[f64], rp_vec: &[f64]) -> Result<f64> {
        let pair = lambert_variables_nd(r_vec, rp_vec, 3)?;
        if !(pair.s > 0.0) {
            return Err(Error::Degenerate("s = 0: source point".into()));
        }
        let sol = self.radial(0)?;
        let (ur, dur, lr) = sol.u_reg(pair.alpha_minus / 2.0)?;
        let (ui, dui, li) = sol.u_irr(pair.alpha_plus / 2.0)?;
        let w = sol.wronskian();
        let bracket = (ur * dui - dur * ui) / w.mant * (lr + li - w.log).exp();
        let coupling = self.params.mu / (self.params.hbar * self.params.hbar);
        Ok(-coupling * bracket / (2.0 * PI * pair.s))
    }

    pub fn green_closed(&self, r_vec: &[f64], rp_vec: &[f64]) -> Result<FieldSample> {
        let value = self.closed_value(r_vec, rp_vec)?;
        Ok(FieldSample {
            r: r_vec.to_vec(),
            rp: rp_vec.to_vec(),
            energy: self.spec.energy,
            method: Method::Qm,
            value: Complex64::new(value, 0.0),
            region: self.region(r_vec, rp_vec)?,
        })
    }
}

fn extent(r_vec: &[f64], rp_vec: &[f64]) -> f64 {
    let (r, rp) = (norm(r_vec), norm(rp_vec));
    let s = r_vec.iter().zip(rp_vec).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    (r + rp + s) / 2.0
}

/// Partial-wave Green function; fails with the tail estimate when l_max
/// does not converge the sum.
pub fn green_qm(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams, l_max: usize) -> Result<FieldSample> {
    QmOracle::new(spec, params, extent(r_vec, rp_vec), l_max)?.green_partial_wave(r_vec, rp_vec)
}

/// Green function through the closed l = 0 reduction.
pub fn green_qm_closed(r_vec: &[f64], rp_vec: &[f64], spec: &EnergySpec, params: &SystemParams) -> Result<FieldSample> {
    QmOracle::new(spec, params, extent(r_vec, rp_vec), 0)?.green_closed(r_vec, rp_vec)
}
