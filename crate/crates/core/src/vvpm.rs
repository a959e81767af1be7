//! Van Vleck-Pauli-Morette determinants of the four elementary paths,
//! their Morse indices, and a finite-difference evaluation of the full
//! (n+1)x(n+1) determinant for cross-checks.
//!
//! D carries units of (mass/time)^(n-1) (time/length)^2: the prefactor
//! 1/(v+ v-) times one transverse factor F ~ mu v/s per direction.

use nalgebra::DMatrix;

use crate::actions::velocity;
use crate::error::{Error, Result};
use crate::geometry::{classify_region, LambertPair, RegionTag};
use crate::model::{EnergySpec, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combo {
    /// F+ + F-
    Sum,
    /// F+ - F-
    Difference,
}

/// Transverse factor per direction orthogonal to the degenerate line.
///
/// F+ = -mu v+/(2s), F- = +mu v-/(2s).
pub fn dimensional_factor(v_plus: f64, v_minus: f64, s: f64, combo: Combo, params: &SystemParams) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Degenerate(format!("s = {s}: coincident endpoints")));
    }
    if !(v_plus >= 0.0 && v_minus >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "speeds must be non-negative: v+={v_plus}, v-={v_minus}"
        )));
    }
    let scale = -params.mu / (2.0 * s);
    Ok(match combo {
        Combo::Sum => scale * (v_plus - v_minus),
        Combo::Difference => scale * (v_plus + v_minus),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VvpmValue {
    pub path_id: u8,
    pub d: f64,
    pub f: f64,
}

fn check_path(path_id: u8) -> Result<()> {
    if (1..=4).contains(&path_id) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("path id {path_id} not in 1..=4")))
    }
}

/// Closed-form determinant from the two projected speeds; valid for every
/// regime in which those speeds are defined.
pub fn vvpm_from_velocities(path_id: u8, v_plus: f64, v_minus: f64, s: f64, params: &SystemParams) -> Result<VvpmValue> {
    check_path(path_id)?;
    let n1 = params.ndim as i32 - 1;
    let inv = 1.0 / (v_plus * v_minus);
    let (combo, sign) = match path_id {
        1 => (Combo::Difference, 1.0),
        2 => (Combo::Sum, -1.0),
        3 => (Combo::Difference, -1.0),
        _ => (Combo::Sum, 1.0),
    };
    let f = dimensional_factor(v_plus, v_minus, s, combo, params)?;
    Ok(VvpmValue {
        path_id,
        d: sign * inv * f.powi(n1),
        f,
    })
}

pub fn vvpm_det(path_id: u8, pair: &LambertPair, spec: &EnergySpec, params: &SystemParams) -> Result<VvpmValue> {
    check_path(path_id)?;
    let region = classify_region(pair, spec, params.is_attractive());
    match region.tag {
        RegionTag::OnCaustic => return Err(Error::OnCaustic { margin: region.margin }),
        RegionTag::Forbidden => return Err(Error::Forbidden { margin: region.margin }),
        RegionTag::Allowed => {}
    }
    if !(pair.s > 0.0) {
        return Err(Error::Degenerate(format!("s = {}: coincident endpoints", pair.s)));
    }
    if !(pair.alpha_minus > 0.0) {
        return Err(Error::Degenerate("alpha_- = 0: path through the force centre".into()));
    }
    let vp = velocity(pair.alpha_plus, spec, params)?;
    let vm = velocity(pair.alpha_minus, spec, params)?;
    vvpm_from_velocities(path_id, vp, vm, pair.s, params)
}

/// Number of conjugate points; each closed loop adds 2(n-1).
pub fn morse_index(path_id: u8, ndim: usize, loops: u32) -> Result<u32> {
    check_path(path_id)?;
    if ndim < 2 {
        return Err(Error::InvalidParams(format!("ndim must be >= 2, got {ndim}")));
    }
    let n = ndim as u32;
    let base = match path_id {
        1 => 0,
        2 => n - 2,
        3 => n - 1,
        _ => 1,
    };
    Ok(base + loops * 2 * (n - 1))
}

/// Finite-difference derivative matrix of an action together with the
/// determinant of the full matrix and of its n x n coordinate block.
#[derive(Debug, Clone)]
pub struct NumericVvpm {
    pub matrix: DMatrix<f64>,
    pub det: f64,
    pub sub_det: f64,
    /// Hadamard bound of the coordinate block, the natural scale for `sub_det`.
    pub sub_scale: f64,
}

const REL_STEP: f64 = 1e-4;

/// Builds [[d2W/dr dr', d2W/dr dE], [d2W/dE dr', 0]] by centred mixed
/// differences with one Richardson step.
pub fn vvpm_matrix_numeric<F>(action_fn: F, r_vec: &[f64], rp_vec: &[f64], energy: f64, params: &SystemParams) -> Result<NumericVvpm>
where
    F: Fn(&[f64], &[f64], f64) -> f64,
{
    let n = params.ndim;
    if r_vec.len() != n || rp_vec.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if r_vec.len() != n { r_vec.len() } else { rp_vec.len() },
        });
    }
    let length = crate::geometry::norm(r_vec).max(crate::geometry::norm(rp_vec));
    let hr = REL_STEP * length;
    let he = REL_STEP * energy.abs();
    if !(hr > f64::MIN_POSITIVE && he > f64::MIN_POSITIVE) {
        return Err(Error::FiniteDifference(format!(
            "step underflow (length scale {length}, energy {energy})"
        )));
    }

    // variable index: 0..n -> r, n..2n -> r', 2n -> E
    let eval = |shifts: &[(usize, f64)]| {
        let mut r = r_vec.to_vec();
        let mut rp = rp_vec.to_vec();
        let mut e = energy;
        for &(idx, d) in shifts {
            if idx < n {
                r[idx] += d;
            } else if idx < 2 * n {
                rp[idx - n] += d;
            } else {
                e += d;
            }
        }
        action_fn(&r, &rp, e)
    };
    let mixed = |i: usize, j: usize, hi: f64, hj: f64| {
        let d = |hi: f64, hj: f64| {
            (eval(&[(i, hi), (j, hj)]) - eval(&[(i, hi), (j, -hj)]) - eval(&[(i, -hi), (j, hj)])
                + eval(&[(i, -hi), (j, -hj)]))
                / (4.0 * hi * hj)
        };
        (4.0 * d(hi / 2.0, hj / 2.0) - d(hi, hj)) / 3.0
    };

    let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = mixed(i, n + j, hr, hr);
        }
        m[(i, n)] = mixed(i, 2 * n, hr, he);
        m[(n, i)] = mixed(2 * n, n + i, he, hr);
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::FiniteDifference(
            "non-finite matrix element (action not smooth near the evaluation point)".into(),
        ));
    }
    let sub = m.view((0, 0), (n, n)).clone_owned();
    let sub_scale: f64 = sub.row_iter().map(|row| row.norm()).product();
    if sub_scale == 0.0 {
        return Err(Error::FiniteDifference("coordinate block vanishes identically".into()));
    }
    let det = m.determinant();
    let sub_det = sub.determinant();
    Ok(NumericVvpm {
        matrix: m,
        det,
        sub_det,
        sub_scale,
    })
}

pub fn vvpm_det_numeric<F>(action_fn: F, r_vec: &[f64], rp_vec: &[f64], energy: f64, params: &SystemParams) -> Result<f64>
where
    F: Fn(&[f64], &[f64], f64) -> f64,
{
    Ok(vvpm_matrix_numeric(action_fn, r_vec, rp_vec, energy, params)?.det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::energy_from_nu;

    #[test]
    fn factor_examples() {
        let p = SystemParams::atomic(3).unwrap();
        assert_eq!(dimensional_factor(1.0, 1.0, 1.0, Combo::Difference, &p).unwrap(), -1.0);
        assert_eq!(dimensional_factor(1.3, 1.3, 0.7, Combo::Sum, &p).unwrap(), 0.0);
        assert_eq!(dimensional_factor(2.0, 1.0, 2.0, Combo::Sum, &p).unwrap(), -0.25);
        assert!(dimensional_factor(1.0, 1.0, 0.0, Combo::Sum, &p).is_err());
    }

    #[test]
    fn morse_examples() {
        assert_eq!(morse_index(3, 3, 0).unwrap(), 2);
        assert_eq!(morse_index(1, 3, 1).unwrap(), 4);
        assert_eq!(morse_index(4, 5, 0).unwrap(), 1);
        assert_eq!(
            [1, 2, 3, 4].map(|i| morse_index(i, 3, 0).unwrap()),
            [0, 1, 2, 1]
        );
        assert!(morse_index(5, 3, 0).is_err());
        for n in 2..8 {
            let m = |i| morse_index(i, n, 0).unwrap();
            assert_eq!(m(3), m(2) + m(4));
            assert_eq!(m(3), n as u32 - 1 - m(1));
            assert_eq!(m(4), n as u32 - 1 - m(2));
        }
    }

    #[test]
    fn sign_identities() {
        for n in 2..6 {
            let p = SystemParams::atomic(n).unwrap();
            let s = energy_from_nu(4.3, &p).unwrap();
            let pair = LambertPair::from_distances(3.0, 5.0, 4.0).unwrap();
            let d: Vec<f64> = (1..=4).map(|i| vvpm_det(i, &pair, &s, &p).unwrap().d).collect();
            assert_eq!(d[0], -d[2]);
            assert_eq!(d[1], -d[3]);
            assert!(d[0] * d[2] < 0.0 && d[1] * d[3] < 0.0);
        }
    }

    #[test]
    fn equal_speeds_kill_path_two() {
        let p = SystemParams::atomic(3).unwrap();
        let v = vvpm_from_velocities(2, 0.8, 0.8, 1.5, &p).unwrap();
        assert_eq!(v.d, 0.0);
    }

    #[test]
    fn caustic_is_rejected() {
        let p = SystemParams::atomic(3).unwrap();
        let s = EnergySpec::from_energy(-0.5, &p).unwrap();
        let pair = LambertPair::from_distances(1.5, 1.5, 1.0).unwrap();
        assert!(matches!(vvpm_det(1, &pair, &s, &p), Err(Error::OnCaustic { .. })));
    }
}
