//! Independent reference solutions: the sphere series, closed-form sphere
//! constants and brute-force operator entries.

pub mod bessel;
pub mod brute;
pub mod mie;

pub use brute::{brute_force_entry, sphere_capacitance, sphere_volume, spheroid_area};
pub use mie::{mie_eval, mie_resonance, mie_scatter, spherical_radius, MieSolution};
