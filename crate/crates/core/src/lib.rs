//! Semiclassical energy Green function of the n-dimensional Coulomb problem
//! in closed form, built on Lambert's theorem: the classical data between two
//! points depend only on alpha_pm = r + r' +- s and the energy.
//!
//! * [`model`]: constants, energies, exact spectrum
//! * [`geometry`]: Lambert variables and region classification
//! * [`actions`]: reduced actions, travel times, velocities
//! * [`vvpm`]: Van Vleck-Pauli-Morette determinants and Morse indices
//! * [`semiclassical`]: four-path sum, loop factor, bound/scattering/tunnel forms
//! * [`uniform`]: Airy functions and the caustic uniform approximation (n = 3)
//! * [`qm_oracle`]: exact quantum reference for n = 3

pub mod actions;
pub mod error;
pub mod geometry;
pub mod model;
pub mod qm_oracle;
pub mod semiclassical;
pub mod uniform;
pub mod vvpm;

pub use error::{Error, Result};
pub use geometry::{lambert_variables, LambertPair, RegionClass, RegionTag};
pub use model::{energy_eigenvalue, energy_from_nu, EnergySpec, Interaction, SystemParams};
pub use semiclassical::{FieldSample, Method};
pub use num_complex::Complex64;
