//! Shared fixtures for the criterion benchmarks.

use minnaert::{make_sphere, SurfaceMesh, C64};

/// Unit sphere about the origin at the given refinement level.
pub fn unit_sphere(level: u32) -> SurfaceMesh {
    make_sphere([0.0; 3], 1.0, level).expect("valid sphere parameters")
}

/// Scaled wavenumber of the canonical bubble near its Minnaert frequency.
pub fn canonical_wavenumber() -> C64 {
    C64::new(0.1 * 3f64.sqrt(), -0.015)
}
