//! Acoustic scattering by a small high-contrast bubble: layer potentials on
//! flat-panel meshes, the Lippmann–Schwinger bubble system, point-scatterer
//! asymptotics, Minnaert resonances and a Mie-series reference solution.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod geometry;
pub mod layer_ops;
pub mod oracle;
pub mod quadrature;
pub mod resonances;
pub mod scattering;
pub mod spectral;
pub mod vec3;

pub use error::{Error, Result};
pub use geometry::{
    make_ellipsoid, make_sphere, make_volume_quadrature, scale_mesh, ScalingMap, SurfaceMesh,
    VolumeQuadrature,
};
pub use layer_ops::{BoundaryOperator, Density, KernelKind, TraceSpace, VolumeField};
pub use vec3::Vec3;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
