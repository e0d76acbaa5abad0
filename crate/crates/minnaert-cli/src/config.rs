//! Run configuration: parsing, defaults and validation.

use std::path::Path;

use minnaert::asymptotics::SourceBump;
use minnaert::scattering::{Medium, ResolventNormalization};
use minnaert::{make_ellipsoid, make_sphere, SurfaceMesh, Vec3, C64};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub medium: MediumConfig,
    /// Gauss–Legendre points per ray of the volume rule.
    #[serde(default = "default_radial_order")]
    pub radial_order: usize,
    #[serde(default)]
    pub experiment: Option<Experiment>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    Sphere { radius: f64, refinement: u32 },
    Ellipsoid { semi_axes: [f64; 3], refinement: u32 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub rho0: f64,
    pub k0: f64,
    pub rho1: f64,
    pub k1: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub center: Vec3,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub center: Vec3,
    pub sigma: f64,
    #[serde(default = "unit_amplitude")]
    pub amplitude: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Hamiltonian,
    Propagator,
}

impl From<Normalization> for ResolventNormalization {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::Hamiltonian => ResolventNormalization::Hamiltonian,
            Normalization::Propagator => ResolventNormalization::Propagator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constants {
    /// Capacitance and volume of the discretised surface.
    Mesh,
    /// Closed-form sphere values.
    Analytic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Capacitance {},
    Minnaert {},
    Scatter {
        omega: f64,
        #[serde(default = "default_direction")]
        direction: Vec3,
        #[serde(default)]
        points: Option<Vec<Vec3>>,
        #[serde(default = "default_sample_radius")]
        sample_radius: f64,
        #[serde(default = "default_sample_count")]
        sample_count: usize,
    },
    Sweep {
        omega_min: f64,
        omega_max: f64,
        steps: usize,
        #[serde(default = "default_direction")]
        direction: Vec3,
        #[serde(default = "default_point")]
        point: Vec3,
    },
    Resolvent {
        /// Frequencies as `[re, im]` pairs in the closed upper half-plane.
        z: Vec<[f64; 2]>,
        #[serde(default)]
        epsilons: Option<Vec<f64>>,
        source: SourceConfig,
        #[serde(default = "default_normalization")]
        normalization: Normalization,
        #[serde(default = "default_sample_radius")]
        sample_radius: f64,
        #[serde(default = "default_sample_count")]
        sample_count: usize,
    },
    Resonances {
        epsilons: Vec<f64>,
        #[serde(default = "default_search_radius")]
        search_radius: f64,
        /// Refinement of the mesh used for the minimum count; defaults to the geometry's.
        #[serde(default)]
        landscape_refinement: Option<u32>,
    },
    Convergence {
        omega: f64,
        epsilons: Vec<f64>,
        #[serde(default = "default_direction")]
        direction: Vec3,
        #[serde(default = "default_sample_radius")]
        sample_radius: f64,
        #[serde(default = "default_sample_count")]
        sample_count: usize,
        #[serde(default = "default_constants")]
        constants: Constants,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Capacitance {} => "capacitance",
            Experiment::Minnaert {} => "minnaert",
            Experiment::Scatter { .. } => "scatter",
            Experiment::Sweep { .. } => "sweep",
            Experiment::Resolvent { .. } => "resolvent",
            Experiment::Resonances { .. } => "resonances",
            Experiment::Convergence { .. } => "convergence",
        }
    }
}

fn default_radial_order() -> usize {
    2
}
fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}
fn default_direction() -> Vec3 {
    [0.0, 0.0, 1.0]
}
fn default_point() -> Vec3 {
    [0.0, 2.0, 0.0]
}
fn default_sample_radius() -> f64 {
    2.0
}
fn default_sample_count() -> usize {
    20
}
fn default_search_radius() -> f64 {
    0.3
}
fn default_normalization() -> Normalization {
    Normalization::Hamiltonian
}
fn default_constants() -> Constants {
    Constants::Mesh
}

fn positive(field: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(format!("{field} must be positive and finite, got {v}")))
    }
}

fn finite_vec(field: &str, v: &Vec3) -> Result<(), Failure> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Failure::Config(format!("{field} must have finite components")))
    }
}

fn direction(field: &str, v: &Vec3) -> Result<(), Failure> {
    finite_vec(field, v)?;
    if v.iter().all(|x| *x == 0.0) {
        return Err(Failure::Config(format!("{field} must be non-zero")));
    }
    Ok(())
}

fn epsilon_list(field: &str, list: &[f64]) -> Result<(), Failure> {
    if list.is_empty() {
        return Err(Failure::Config(format!("{field} must not be empty")));
    }
    for (k, e) in list.iter().enumerate() {
        positive(&format!("{field}[{k}]"), *e)?;
    }
    Ok(())
}

impl RunConfig {
    /// Reads and validates `path`; the experiment section must match `subcommand`.
    pub fn load(path: &Path, subcommand: &str) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        match (&cfg.experiment, subcommand) {
            (None, "capacitance") => cfg.experiment = Some(Experiment::Capacitance {}),
            (None, "minnaert") => cfg.experiment = Some(Experiment::Minnaert {}),
            (None, _) => {
                return Err(Failure::Config(format!(
                    "experiment section with kind \"{subcommand}\" is required"
                )))
            }
            (Some(e), s) if e.name() != s => {
                return Err(Failure::Config(format!(
                    "experiment.kind is \"{}\" but the subcommand is {s}",
                    e.name()
                )))
            }
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        match &self.geometry {
            GeometryConfig::Sphere { radius, refinement } => {
                positive("geometry.radius", *radius)?;
                refinement_in_range(*refinement)?;
            }
            GeometryConfig::Ellipsoid { semi_axes, refinement } => {
                for (k, a) in semi_axes.iter().enumerate() {
                    positive(&format!("geometry.semi_axes[{k}]"), *a)?;
                }
                refinement_in_range(*refinement)?;
            }
        }
        let m = &self.medium;
        for (name, v) in [("rho0", m.rho0), ("k0", m.k0), ("rho1", m.rho1), ("k1", m.k1), ("epsilon", m.epsilon)] {
            positive(&format!("medium.{name}"), v)?;
        }
        finite_vec("medium.center", &m.center)?;
        if self.radial_order < 2 {
            return Err(Failure::Config(format!("radial_order must be at least 2, got {}", self.radial_order)));
        }
        match self.experiment.as_ref().expect("resolved on load") {
            Experiment::Capacitance {} | Experiment::Minnaert {} => {}
            Experiment::Scatter { omega, direction: d, points, sample_radius, sample_count } => {
                positive("experiment.omega", *omega)?;
                direction("experiment.direction", d)?;
                match points {
                    Some(p) => {
                        for (k, x) in p.iter().enumerate() {
                            finite_vec(&format!("experiment.points[{k}]"), x)?;
                        }
                    }
                    None => samples(*sample_radius, *sample_count)?,
                }
            }
            Experiment::Sweep { omega_min, omega_max, steps, direction: d, point } => {
                positive("experiment.omega_min", *omega_min)?;
                positive("experiment.omega_max", *omega_max)?;
                if omega_max <= omega_min {
                    return Err(Failure::Config("experiment.omega_max must exceed experiment.omega_min".into()));
                }
                if *steps < 2 {
                    return Err(Failure::Config(format!("experiment.steps must be at least 2, got {steps}")));
                }
                direction("experiment.direction", d)?;
                finite_vec("experiment.point", point)?;
            }
            Experiment::Resolvent { z, epsilons, source, sample_radius, sample_count, .. } => {
                if z.is_empty() {
                    return Err(Failure::Config("experiment.z must not be empty".into()));
                }
                for (k, v) in z.iter().enumerate() {
                    if !(v[0].is_finite() && v[1].is_finite()) || (v[0] == 0.0 && v[1] == 0.0) || v[1] < 0.0 {
                        return Err(Failure::Config(format!(
                            "experiment.z[{k}] must be finite, non-zero and in the closed upper half-plane"
                        )));
                    }
                }
                if let Some(e) = epsilons {
                    epsilon_list("experiment.epsilons", e)?;
                }
                finite_vec("experiment.source.center", &source.center)?;
                positive("experiment.source.sigma", source.sigma)?;
                samples(*sample_radius, *sample_count)?;
            }
            Experiment::Resonances { epsilons, search_radius, landscape_refinement } => {
                epsilon_list("experiment.epsilons", epsilons)?;
                positive("experiment.search_radius", *search_radius)?;
                if let Some(l) = landscape_refinement {
                    refinement_in_range(*l)?;
                }
            }
            Experiment::Convergence { omega, epsilons, direction: d, sample_radius, sample_count, .. } => {
                positive("experiment.omega", *omega)?;
                epsilon_list("experiment.epsilons", epsilons)?;
                if epsilons.len() < 2 {
                    return Err(Failure::Config("experiment.epsilons needs at least two values".into()));
                }
                direction("experiment.direction", d)?;
                samples(*sample_radius, *sample_count)?;
            }
        }
        Ok(())
    }

    pub fn medium(&self) -> Medium {
        let m = &self.medium;
        Medium { rho0: m.rho0, k0: m.k0, rho1: m.rho1, k1: m.k1, epsilon: m.epsilon, center: m.center }
    }

    pub fn refinement(&self) -> u32 {
        match self.geometry {
            GeometryConfig::Sphere { refinement, .. } | GeometryConfig::Ellipsoid { refinement, .. } => refinement,
        }
    }

    /// Reference mesh about the bubble centre at the given refinement.
    pub fn mesh(&self, refinement: u32) -> Result<SurfaceMesh, Failure> {
        let c = self.medium.center;
        Ok(match self.geometry {
            GeometryConfig::Sphere { radius, .. } => make_sphere(c, radius, refinement)?,
            GeometryConfig::Ellipsoid { semi_axes, .. } => make_ellipsoid(c, semi_axes, refinement)?,
        })
    }

    pub fn sphere_radius(&self) -> Option<f64> {
        match self.geometry {
            GeometryConfig::Sphere { radius, .. } => Some(radius),
            GeometryConfig::Ellipsoid { .. } => None,
        }
    }
}

impl SourceConfig {
    pub fn bump(&self) -> Result<SourceBump, Failure> {
        Ok(SourceBump::gaussian(self.center, self.sigma, C64::new(self.amplitude[0], self.amplitude[1]))?)
    }
}

fn refinement_in_range(level: u32) -> Result<(), Failure> {
    if level > 4 {
        return Err(Failure::Config(format!("refinement must be at most 4, got {level}")));
    }
    Ok(())
}

fn samples(radius: f64, count: usize) -> Result<(), Failure> {
    positive("experiment.sample_radius", radius)?;
    if count == 0 {
        return Err(Failure::Config("experiment.sample_count must be positive".into()));
    }
    Ok(())
}
