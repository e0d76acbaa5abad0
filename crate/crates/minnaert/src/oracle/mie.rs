//! Exact series solution for a spherical bubble hit by a plane wave.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::{derivatives, spherical_h1, spherical_j};
use crate::error::{Error, Result};
use crate::geometry::SurfaceMesh;
use crate::scattering::{IncidentField, IncidentKind, Medium};
use crate::vec3::{self, Vec3};

type C64 = Complex64;

/// Default number of retained degrees.
pub const DEFAULT_DEGREE: usize = 12;

/// Per-degree coefficients of the series. For degree `l` the exterior field is
/// `i^l (2l+1) [j_l(k₀r) + a_l h_l(k₀r)] P_l(cos θ)` and the interior field
/// `i^l (2l+1) b_l j_l(k₁r) P_l(cos θ)`, with `r`, `θ` measured from the
/// centre and the incidence direction, times the incident phase at the centre.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MieSolution {
    pub omega: f64,
    pub medium: Medium,
    pub radius: f64,
    pub direction: Vec3,
    pub amplitude: C64,
    pub max_degree: usize,
    pub exterior: Vec<C64>,
    pub interior: Vec<C64>,
    /// `|a_L| / |a_0|` for the last retained degree.
    pub convergence: f64,
    /// Largest residual of the per-degree transmission systems.
    pub transmission_residual: f64,
}

fn degree_coefficients(medium: &Medium, omega: C64, radius: f64, lmax: usize) -> (Vec<C64>, Vec<C64>, f64) {
    let kw0 = omega / medium.c0();
    let kw1 = omega / medium.c1();
    let x0 = kw0 * radius;
    let x1 = kw1 * radius;
    let j0 = spherical_j(lmax + 1, x0);
    let h0 = spherical_h1(lmax + 1, x0);
    let j1 = spherical_j(lmax + 1, x1);
    let dj0 = derivatives(&j0, x0);
    let dh0 = derivatives(&h0, x0);
    let dj1 = derivatives(&j1, x1);
    // Flux weights 1/ρ₀ outside and 1/(ρ₁ε²) inside.
    let w_out = kw0 / medium.rho0;
    let w_in = kw1 / (medium.rho1 * medium.epsilon * medium.epsilon);
    let mut a = Vec::with_capacity(lmax + 1);
    let mut b = Vec::with_capacity(lmax + 1);
    let mut residual: f64 = 0.0;
    for l in 0..=lmax {
        // [h, −j1; w_out h', −w_in j1'] (a, b) = −(j, w_out j').
        let m00 = h0[l];
        let m01 = -j1[l];
        let m10 = w_out * dh0[l];
        let m11 = -w_in * dj1[l];
        let r0 = -j0[l];
        let r1 = -w_out * dj0[l];
        let det = m00 * m11 - m01 * m10;
        let al = (r0 * m11 - m01 * r1) / det;
        let bl = (m00 * r1 - m10 * r0) / det;
        let res0 = (m00 * al + m01 * bl - r0).norm() / (r0.norm() + m00.norm() * al.norm() + 1e-300);
        let res1 = (m10 * al + m11 * bl - r1).norm() / (r1.norm() + m10.norm() * al.norm() + 1e-300);
        residual = residual.max(res0).max(res1);
        a.push(al);
        b.push(bl);
    }
    (a, b, residual)
}

/// Series coefficients for a plane wave on the sphere of radius
/// `medium.epsilon · reference_radius` about `medium.center`.
pub fn mie_scatter(medium: &Medium, reference_radius: f64, incident: &IncidentField) -> Result<MieSolution> {
    medium.validate()?;
    let direction = match incident.kind {
        IncidentKind::PlaneWave { direction } => direction,
        IncidentKind::PointSource { .. } => {
            return Err(Error::UnsupportedGeometry("series solution needs a plane wave".into()))
        }
    };
    if !(reference_radius > 0.0) {
        return Err(Error::Config("reference radius must be positive".into()));
    }
    let radius = medium.epsilon * reference_radius;
    let omega = C64::new(incident.omega, 0.0);
    let mut lmax = DEFAULT_DEGREE;
    loop {
        let (mut exterior, mut interior, residual) = degree_coefficients(medium, omega, radius, lmax);
        let lead = exterior[0].norm().max(1e-300);
        let convergence = exterior[lmax].norm() / lead;
        if convergence <= 1e-12 || lmax >= 60 || exterior.iter().all(|a| a.norm() == 0.0) {
            for c in exterior.iter_mut().chain(interior.iter_mut()) {
                *c *= incident.amplitude;
            }
            return Ok(MieSolution {
                omega: incident.omega,
                medium: *medium,
                radius,
                direction,
                amplitude: incident.amplitude,
                max_degree: lmax,
                exterior,
                interior,
                convergence,
                transmission_residual: residual,
            });
        }
        lmax *= 2;
    }
}

/// Checks that every vertex of `mesh` lies on one sphere about `center`.
pub fn spherical_radius(mesh: &SurfaceMesh, center: Vec3) -> Result<f64> {
    let r: Vec<f64> = mesh.vertices().iter().map(|v| vec3::dist(*v, center)).collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    if r.iter().any(|x| (x - mean).abs() > 1e-9 * mean) {
        return Err(Error::UnsupportedGeometry("mesh is not a sphere about the bubble centre".into()));
    }
    Ok(mean)
}

fn legendre(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; lmax + 1];
    p[0] = 1.0;
    if lmax >= 1 {
        p[1] = x;
    }
    for l in 1..lmax {
        p[l + 1] = ((2 * l + 1) as f64 * x * p[l] - l as f64 * p[l - 1]) / (l + 1) as f64;
    }
    p
}

impl MieSolution {
    fn phase(&self) -> C64 {
        let k = self.omega / self.medium.c0();
        (C64::i() * k * vec3::dot(self.direction, self.medium.center)).exp()
    }

    fn polar(&self, x: Vec3) -> (f64, f64) {
        let d = vec3::sub(x, self.medium.center);
        let r = vec3::norm(d);
        let ct = if r > 0.0 { vec3::dot(d, self.direction) / r } else { 1.0 };
        (r, ct.clamp(-1.0, 1.0))
    }

    /// Scattered field outside the sphere, interior field minus the incident
    /// wave inside.
    pub fn scattered(&self, points: &[Vec3]) -> Vec<C64> {
        points.iter().map(|x| self.total_at(*x) - self.incident_at(*x)).collect()
    }

    /// Total field.
    pub fn total(&self, points: &[Vec3]) -> Vec<C64> {
        points.iter().map(|x| self.total_at(*x)).collect()
    }

    /// Normal derivative of the interior field on the sphere, from inside.
    pub fn interior_radial_derivative(&self, x: Vec3) -> C64 {
        let (_, ct) = self.polar(x);
        let k1 = self.omega / self.medium.c1();
        let arg = C64::new(k1 * self.radius, 0.0);
        let j = spherical_j(self.max_degree + 1, arg);
        let dj = derivatives(&j, arg);
        let p = legendre(self.max_degree, ct);
        let mut s = C64::new(0.0, 0.0);
        for l in 0..=self.max_degree {
            s += C64::i().powi(l as i32) * ((2 * l + 1) as f64) * self.interior[l] * dj[l] * k1 * p[l];
        }
        s * self.phase()
    }

    fn incident_at(&self, x: Vec3) -> C64 {
        let k = self.omega / self.medium.c0();
        self.amplitude * (C64::i() * k * vec3::dot(self.direction, x)).exp()
    }

    fn total_at(&self, x: Vec3) -> C64 {
        let (r, ct) = self.polar(x);
        let p = legendre(self.max_degree, ct);
        let mut s = C64::new(0.0, 0.0);
        if r >= self.radius {
            let arg = C64::new(self.omega / self.medium.c0() * r, 0.0);
            let h = spherical_h1(self.max_degree, arg);
            for l in 0..=self.max_degree {
                s += C64::i().powi(l as i32) * ((2 * l + 1) as f64) * self.exterior[l] * h[l] * p[l];
            }
            s * self.phase() + self.incident_at(x)
        } else {
            let arg = C64::new(self.omega / self.medium.c1() * r, 0.0);
            let j = spherical_j(self.max_degree, arg);
            for l in 0..=self.max_degree {
                s += C64::i().powi(l as i32) * ((2 * l + 1) as f64) * self.interior[l] * j[l] * p[l];
            }
            s * self.phase()
        }
    }
}

/// Series solution evaluated at points; convenience wrapper.
pub fn mie_eval(solution: &MieSolution, points: &[Vec3]) -> Vec<C64> {
    solution.total(points)
}

/// Determinant of the degree-0 transmission system at complex frequency `z`.
fn monopole_determinant(medium: &Medium, radius: f64, z: C64) -> C64 {
    let x0 = z / medium.c0() * radius;
    let x1 = z / medium.c1() * radius;
    let h = spherical_h1(1, x0);
    let j = spherical_j(1, x1);
    let w_out = z / medium.c0() / medium.rho0;
    let w_in = z / medium.c1() / (medium.rho1 * medium.epsilon * medium.epsilon);
    // dh_0 = −h_1, dj_0 = −j_1.
    -h[0] * w_in * j[1] + j[0] * w_out * h[1]
}

/// Complex root of the degree-0 determinant near `seed`, by Newton's method.
pub fn mie_resonance(medium: &Medium, reference_radius: f64, seed: C64) -> Result<C64> {
    let radius = medium.epsilon * reference_radius;
    let f = |z: C64| monopole_determinant(medium, radius, z);
    let mut z = seed;
    for _ in 0..100 {
        let step = 1e-7 * z.norm().max(1e-3);
        let d = (f(z + step) - f(z - step)) / (2.0 * step);
        let dz = f(z) / d;
        z -= dz;
        if !(z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        if dz.norm() <= 1e-14 * z.norm() {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence {
        iterations: 100,
        detail: format!("monopole determinant Newton from seed {seed}"),
    })
}
