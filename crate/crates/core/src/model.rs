//! Physical constants, energy bookkeeping and the exact hydrogenic spectrum.
//!
//! Units are whatever the caller chooses for `mu`, `kc` and `hbar`; the
//! defaults are atomic units (lengths in Bohr, energies in Hartree).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Sign of the 1/r interaction. Kept separate from `kc` so that all
/// repulsive formulas can be written in terms of |a|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    Attractive,
    Repulsive,
}

/// Reduced mass `mu`, Coulomb strength `kc` (energy x length), action
/// quantum `hbar` and spatial dimension `ndim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub mu: f64,
    pub kc: f64,
    pub hbar: f64,
    pub ndim: usize,
    pub interaction: Interaction,
}

impl SystemParams {
    pub fn new(mu: f64, kc: f64, hbar: f64, ndim: usize) -> Result<Self> {
        let p = Self {
            mu,
            kc,
            hbar,
            ndim,
            interaction: Interaction::Attractive,
        };
        p.validate()?;
        Ok(p)
    }

    /// mu = kc = hbar = 1.
    pub fn atomic(ndim: usize) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, ndim)
    }

    pub fn repulsive(mut self) -> Self {
        self.interaction = Interaction::Repulsive;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.mu) {
            return Err(Error::InvalidParams(format!("mu must be positive, got {}", self.mu)));
        }
        if !ok(self.kc) {
            return Err(Error::InvalidParams(format!("kc must be positive, got {}", self.kc)));
        }
        if !ok(self.hbar) {
            return Err(Error::InvalidParams(format!("hbar must be positive, got {}", self.hbar)));
        }
        if self.ndim < 2 {
            return Err(Error::InvalidParams(format!("ndim must be >= 2, got {}", self.ndim)));
        }
        Ok(())
    }

    pub fn is_attractive(&self) -> bool {
        self.interaction == Interaction::Attractive
    }

    /// (n - 1)/2
    pub fn half_transverse(&self) -> f64 {
        (self.ndim as f64 - 1.0) / 2.0
    }
}

/// Energy together with the derived semimajor-axis scale a = kc/(2|E|).
///
/// `k` and `nu` are the continuous quantum numbers of the attractive bound
/// regime (nu = k + 1); they are `None` for E > 0 or a repulsive interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySpec {
    pub energy: f64,
    pub a: f64,
    pub k: Option<f64>,
    pub nu: Option<f64>,
}

impl EnergySpec {
    pub fn from_energy(energy: f64, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        if !energy.is_finite() || energy == 0.0 {
            return Err(Error::InvalidParams(format!(
                "energy must be finite and nonzero, got {energy}"
            )));
        }
        let a = params.kc / (2.0 * energy.abs());
        let (k, nu) = if energy < 0.0 && params.is_attractive() {
            let k = (params.mu * params.kc * params.kc / (2.0 * params.hbar * params.hbar * energy.abs()))
                .sqrt()
                - params.half_transverse();
            (Some(k), Some(k + 1.0))
        } else {
            (None, None)
        };
        Ok(Self { energy, a, k, nu })
    }

    pub fn is_bound(&self) -> bool {
        self.energy < 0.0
    }

    /// Continuous quantum number, available only in the attractive bound regime.
    pub fn bound_k(&self) -> Result<f64> {
        self.k.ok_or_else(|| {
            Error::OutOfDomain(format!(
                "quantum number k undefined for E = {} (needs attractive E < 0)",
                self.energy
            ))
        })
    }
}

/// E_k = -mu kc^2 / (2 hbar^2 (k + (n-1)/2)^2)
pub fn energy_eigenvalue(k: u32, params: &SystemParams) -> f64 {
    let q = k as f64 + params.half_transverse();
    -params.mu * params.kc * params.kc / (2.0 * params.hbar * params.hbar * q * q)
}

/// Inverts the spectrum for a continuous nu = k + 1.
pub fn energy_from_nu(nu: f64, params: &SystemParams) -> Result<EnergySpec> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::InvalidParams(format!("nu must be positive, got {nu}")));
    }
    params.validate()?;
    if !params.is_attractive() {
        return Err(Error::InvalidParams("bound states need an attractive interaction".into()));
    }
    let q = nu - 1.0 + params.half_transverse();
    if q <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "nu = {nu} gives a non-positive effective quantum number in n = {}",
            params.ndim
        )));
    }
    let energy = -params.mu * params.kc * params.kc / (2.0 * params.hbar * params.hbar * q * q);
    let a = params.kc / (2.0 * energy.abs());
    let k = nu - 1.0;
    Ok(EnergySpec {
        energy,
        a,
        k: Some(k),
        nu: Some(nu),
    })
}

/// Round-trip action of the k-th eigenstate, h (k + (n-1)/2).
pub fn quantization_action(k: u32, params: &SystemParams) -> f64 {
    2.0 * PI * params.hbar * (k as f64 + params.half_transverse())
}
