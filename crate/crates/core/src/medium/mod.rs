//! Artificial dielectric built from V-type point scatterers.

pub mod cloud;
pub mod geometry;
pub mod permittivity;

pub use cloud::{expected_count, generate_cloud, DipoleCloud, Placement, DEFAULT_R_MIN};
pub use geometry::{Aabb, AtomPlacement, Geometry};
pub use permittivity::{
    f0_sq_for, far_detuned_eps, fit_detuning, gamma_e_from_dipole, permittivity, permittivity_scan, MediumModel,
};
