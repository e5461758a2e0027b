//! Excitation spectrum of a multilevel atom next to a dielectric nanostructure
//! modeled as a dense cloud of point scatterers.
//!
//! Internal units: `hbar = c = 1`, lengths in reduced wavelengths
//! `lambda0 / 2 pi` of the reference transition, energies and rates in units
//! of the free-space linewidth `Gamma_inf` of that transition.

pub mod angular;
pub mod error;
pub mod greens;
pub mod medium;
pub mod runner;
pub mod spectrum;
pub mod vdw;

pub use error::{Error, Result};
